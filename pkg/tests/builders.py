"""Hand-made instances for tests."""

from __future__ import annotations

from greenlrip.instance import DcSite, Instance, Retailer, Vehicle


def dc(x=0.0, y=0.0, capacity=1000.0, **kw) -> DcSite:
    base = dict(fixed_cost=700.0, inbound_fixed_cost=12.0, order_cost=11.0, supply_cost=6.0, lead_time=8.0,
                holding_cost=7.0, capacity=capacity, emission_weight=1.0)
    base.update(kw)
    return DcSite(coord=(x, y), **base)


def retailer(x=10.0, y=0.0, mean=500.0, var=50.0) -> Retailer:
    return Retailer(coord=(x, y), demand_mean=mean, demand_var=var)


def vehicle(capacity=1000.0, fixed=60.0, empty=0.1, full=0.3, gamma=2.6) -> Vehicle:
    return Vehicle(capacity=capacity, fixed_cost=fixed, fuel_empty=empty, fuel_full=full, emission_factor=gamma)


def worked_example() -> Instance:
    """Two DCs of capacity 1000, retailer demands 300/700/400/600, three 300-unit vehicles per layer."""
    return Instance(
        dc_sites=(dc(20, 20), dc(80, 80)),
        retailers=tuple(retailer(x, y, m) for (x, y), m in
                        zip([(10, 30), (30, 10), (70, 90), (90, 70)], (300, 700, 400, 600))),
        inbound_vehicles=tuple(vehicle(300) for _ in range(3)),
        outbound_vehicles=tuple(vehicle(300) for _ in range(3)),
    )


def single(capacity=1000.0, mean=400.0, var=25.0, vcap=1000.0) -> Instance:
    """One DC, one retailer, one vehicle per layer."""
    return Instance(
        dc_sites=(dc(30, 40, capacity),),
        retailers=(retailer(30, 50, mean, var),),
        inbound_vehicles=(vehicle(vcap),),
        outbound_vehicles=(vehicle(vcap),),
    )
