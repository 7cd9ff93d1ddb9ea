"""Cost (z1) and CO2 emission (z2) of a decoded plan."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple

from .decoder import Plan
from .instance import Instance
from .inventory import classify, inventory_terms, safety_stock


class ObjectivePair(NamedTuple):
    z1: float
    z2: float


class ContractError(ValueError):
    """Plan and instance do not belong together."""


@dataclass(frozen=True)
class CostBreakdown:
    fixed_dc: float = 0.0
    fixed_fleet: float = 0.0
    shipping_inbound: float = 0.0
    shipping_outbound: float = 0.0
    ordering: float = 0.0
    inventory: float = 0.0
    penalty: float = 0.0

    @property
    def total(self) -> float:
        return math.fsum(getattr(self, f.name) for f in fields(self))


@dataclass(frozen=True)
class EmissionBreakdown:
    inbound: float = 0.0
    outbound: float = 0.0
    dc: float = 0.0
    penalty: float = 0.0

    @property
    def total(self) -> float:
        return math.fsum(getattr(self, f.name) for f in fields(self))


def penalty(plan: Plan, penalty_rate: float | None = None) -> ObjectivePair:
    """Linear penalty on both objectives per retailer left unassigned or unserved."""
    rate = plan.penalty_rate if penalty_rate is None else penalty_rate
    p = rate * plan.n_violations
    return ObjectivePair(p, p)


def _check(plan: Plan, instance: Instance) -> None:
    if len(plan.assignment) != instance.n_retailers:
        raise ContractError(
            f"plan covers {len(plan.assignment)} retailers, instance has {instance.n_retailers}"
        )
    n_dc = instance.n_dcs
    if any(k >= n_dc for k in plan.open_dcs) or any(k >= n_dc for k in plan.assignment):
        raise ContractError("plan references a DC outside the instance")
    if any(t.vehicle >= len(instance.outbound_vehicles) for t in plan.tours):
        raise ContractError("plan references an outbound vehicle outside the instance")
    for _, trips in plan.inbound_trips:
        if any(v >= len(instance.inbound_vehicles) for v, _ in trips):
            raise ContractError("plan references an inbound vehicle outside the instance")


def dc_expected_inventory(plan: Plan, instance: Instance) -> dict[int, float]:
    """Expected inventory per operating DC, shared by both objectives."""
    mu = instance.demand_means
    var = instance.demand_vars
    z = instance.z_alpha
    freq = plan.freq
    qty = plan.qty
    sums: dict[int, list[float]] = {k: [0.0, 0.0] for k in plan.open_dcs}
    for i, k in enumerate(plan.assignment):
        if k in sums:
            sums[k][0] += mu[i]
            sums[k][1] += var[i]
    out = {}
    for k in plan.open_dcs:
        mu_sum, var_sum = sums[k]
        n, q = freq[k], qty[k]
        lead = instance.dc_sites[k].lead_time
        t, tp = classify(mu_sum, var_sum, n, q, lead, z)
        out[k] = inventory_terms(mu_sum, n * q, safety_stock(var_sum, lead, z), t, tp)
    return out


def evaluate_cost(plan: Plan, instance: Instance, inventory: dict[int, float] | None = None) -> CostBreakdown:
    _check(plan, instance)
    inv = dc_expected_inventory(plan, instance) if inventory is None else inventory
    dcs = instance.dc_sites
    freq = plan.freq
    qty = plan.qty
    dist = instance.dist_list

    fixed_dc = math.fsum(dcs[k].fixed_cost for k in plan.open_dcs)
    fleet = [instance.inbound_vehicles[v].fixed_cost for _, trips in plan.inbound_trips for v, _ in trips]
    fleet += [instance.outbound_vehicles[t.vehicle].fixed_cost for t in plan.tours]
    ship_in = math.fsum((dcs[k].inbound_fixed_cost + dcs[k].supply_cost * qty[k]) * freq[k] for k in plan.open_dcs)
    route = []
    for t in plan.tours:
        length = math.fsum(dist[a][b] for a, b in t.arcs(instance))
        route.append(instance.ship_rate * length * freq[t.dc])
    ordering = math.fsum(dcs[k].order_cost * freq[k] for k in plan.open_dcs)
    inventory_cost = instance.theta * math.fsum(dcs[k].holding_cost * inv[k] for k in plan.open_dcs)
    return CostBreakdown(
        fixed_dc=fixed_dc,
        fixed_fleet=math.fsum(fleet),
        shipping_inbound=instance.beta * ship_in,
        shipping_outbound=instance.beta * math.fsum(route),
        ordering=ordering,
        inventory=inventory_cost,
        penalty=penalty(plan).z1,
    )


def evaluate_emission(plan: Plan, instance: Instance, inventory: dict[int, float] | None = None) -> EmissionBreakdown:
    _check(plan, instance)
    inv = dc_expected_inventory(plan, instance) if inventory is None else inventory
    dcs = instance.dc_sites
    freq = plan.freq
    dist = instance.dist_list

    inbound = []
    for k, trips in plan.inbound_trips:
        d = dist[0][instance.dc_node(k)]
        for v, u in trips:
            veh = instance.inbound_vehicles[v]
            inbound.append(veh.emission_factor * (2 * veh.fuel_empty + veh.load_slope * u) * freq[k] * d)
    outbound = []
    for t in plan.tours:
        veh = instance.outbound_vehicles[t.vehicle]
        for (a, b), u in zip(t.arcs(instance), t.loads):
            outbound.append(veh.emission_factor * (veh.fuel_empty + veh.load_slope * u) * freq[t.dc] * dist[a][b])
    dc_em = math.fsum(dcs[k].emission_weight * dcs[k].holding_cost * inv[k] for k in plan.open_dcs)
    return EmissionBreakdown(
        inbound=math.fsum(inbound),
        outbound=math.fsum(outbound),
        dc=dc_em,
        penalty=penalty(plan).z2,
    )


def evaluate_breakdown(plan: Plan, instance: Instance) -> tuple[CostBreakdown, EmissionBreakdown]:
    inv = dc_expected_inventory(plan, instance)
    return evaluate_cost(plan, instance, inv), evaluate_emission(plan, instance, inv)


def evaluate(plan: Plan, instance: Instance) -> ObjectivePair:
    cost, emission = evaluate_breakdown(plan, instance)
    return ObjectivePair(cost.total, emission.total)


class Evaluator:
    """Counts objective evaluations and memoizes them per plan.

    Every call counts toward the budget even on a cache hit, so the count
    matches the number of evaluation requests made by an algorithm.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        self.count = 0
        self._cache: dict[Plan, ObjectivePair] = {}

    def __call__(self, plan: Plan) -> ObjectivePair:
        self.count += 1
        hit = self._cache.get(plan)
        if hit is None:
            hit = evaluate(plan, self.instance)
            self._cache[plan] = hit
        return hit
