import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from builders import dc, retailer, single, vehicle
from greenlrip.decoder import Decoder, decode, empty_plan
from greenlrip.evaluation import ContractError, Evaluator, evaluate, evaluate_breakdown, evaluate_cost, evaluate_emission
from greenlrip.instance import Instance, generate

Z95 = 1.6448536269514722


def test_single_dc_hand_expansion():
    inst = single()  # DC (30,40), retailer (30,50), supplier at the origin
    plan = decode(np.full(4, 0.5), inst, 1)
    cost, em = evaluate_breakdown(plan, inst)
    ss = Z95 * math.sqrt(8 * 25)
    assert cost.fixed_dc == pytest.approx(700)
    assert cost.fixed_fleet == pytest.approx(120)
    assert cost.shipping_inbound == pytest.approx(12 + 6 * 400)
    assert cost.shipping_outbound == pytest.approx(20)
    assert cost.ordering == pytest.approx(11)
    assert cost.inventory == pytest.approx(7 * ss)
    assert em.inbound == pytest.approx(2.6 * (2 * 0.1 + 0.2 / 1000 * 400) * 50)
    assert em.outbound == pytest.approx(2.6 * (0.1 + 0.2 / 1000 * 400) * 10 + 2.6 * 0.1 * 10)
    assert em.dc == pytest.approx(7 * ss)
    assert tuple(evaluate(plan, inst)) == pytest.approx((cost.total, em.total))


def test_inbound_emission_example():
    inst = Instance((dc(6, 8),), (retailer(6, 9, 50, 1),), (vehicle(100, empty=0.1, full=0.3, gamma=2),),
                    (vehicle(100),))
    plan = decode(np.full(4, 0.5), inst, 1)
    assert plan.inbound[0] == ((0, 50),)
    assert evaluate_emission(plan, inst).inbound == pytest.approx(6.0)


def test_full_vehicle_emits_full_rate():
    v = vehicle(400, empty=0.12, full=0.31, gamma=2.6)
    assert v.fuel_empty + v.load_slope * v.capacity == pytest.approx(v.fuel_full)


def test_empty_plan_costs_nothing():
    inst = generate((2, 4, 3, 3), 0)
    plan = empty_plan(inst)
    cost, em = evaluate_breakdown(plan, inst)
    assert cost.total == 0 and em.total == 0


def test_beta_scales_only_shipping():
    inst = generate((2, 5, 3, 3), 1)
    keys = np.random.default_rng(0).random(inst.chromosome_length)
    plan = decode(keys, inst)
    a = evaluate_cost(plan, inst)
    b = evaluate_cost(plan, replace(inst, beta=2 * inst.beta))
    assert b.shipping_inbound == pytest.approx(2 * a.shipping_inbound)
    assert b.shipping_outbound == pytest.approx(2 * a.shipping_outbound)
    for f in ("fixed_dc", "fixed_fleet", "ordering", "inventory"):
        assert getattr(b, f) == getattr(a, f)


def _scaled(inst, s):
    return replace(
        inst,
        dc_sites=tuple(replace(d, coord=(d.coord[0] * s, d.coord[1] * s)) for d in inst.dc_sites),
        retailers=tuple(replace(r, coord=(r.coord[0] * s, r.coord[1] * s)) for r in inst.retailers),
        supplier_coord=(inst.supplier_coord[0] * s, inst.supplier_coord[1] * s),
    )


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 100), st.floats(0.1, 10))
def test_distance_scale_property(seed, s):
    inst = generate((2, 4, 3, 3), seed)
    plan = decode(np.random.default_rng(seed).random(inst.chromosome_length), inst, 4)
    big = _scaled(inst, s)
    c0, e0 = evaluate_breakdown(plan, inst)
    c1, e1 = evaluate_breakdown(plan, big)
    assert c1.shipping_outbound == pytest.approx(s * c0.shipping_outbound, rel=1e-9)
    assert e1.inbound == pytest.approx(s * e0.inbound, rel=1e-9)
    assert e1.outbound == pytest.approx(s * e0.outbound, rel=1e-9)


def test_adding_a_retailer_never_lowers_outbound_emission():
    inst = Instance((dc(50, 50, 10_000),), tuple(retailer(10 + 20 * j, 30, 300, 20) for j in range(4)),
                    (vehicle(5000),), (vehicle(5000),))
    dec = Decoder(inst, 1)
    prev = 0.0
    for m in range(1, 5):
        assignment = [0] * m + [-1] * (4 - m)
        plan = dec.build([0], [0, 1, 2, 3], assignment, (), {0: 1}, [0], [0])
        out = evaluate_emission(plan, inst).outbound
        assert out >= prev - 1e-12
        prev = out


def _oracle(plan, inst):
    """Independent re-summation straight from the instance fields."""
    pts = [inst.supplier_coord] + [d.coord for d in inst.dc_sites] + [r.coord for r in inst.retailers]
    d = lambda a, b: math.dist(pts[a], pts[b])  # noqa: E731
    z = inst.z_alpha
    z1 = z2 = 0.0
    for k in plan.open_dcs:
        site = inst.dc_sites[k]
        n, q = plan.freq[k], plan.qty[k]
        members = [i for i, kk in enumerate(plan.assignment) if kk == k]
        mu = sum(inst.retailers[i].demand_mean for i in members)
        var = sum(inst.retailers[i].demand_var for i in members)
        ss = z * math.sqrt(site.lead_time * var)
        inv = (mu - n * q) + ss if n * q < mu else max(ss, n * q - mu)
        z1 += site.fixed_cost + inst.beta * (site.inbound_fixed_cost + site.supply_cost * q) * n
        z1 += site.order_cost * n + inst.theta * site.holding_cost * inv
        z2 += site.emission_weight * site.holding_cost * inv
        for v, u in plan.inbound[k]:
            veh = inst.inbound_vehicles[v]
            z1 += veh.fixed_cost
            slope = (veh.fuel_full - veh.fuel_empty) / veh.capacity
            z2 += veh.emission_factor * (2 * veh.fuel_empty + slope * u) * n * d(0, 1 + k)
    for t in plan.tours:
        veh = inst.outbound_vehicles[t.vehicle]
        n = plan.freq[t.dc]
        path = [1 + t.dc] + [1 + inst.n_dcs + i for i in t.retailers] + [1 + t.dc]
        z1 += veh.fixed_cost
        slope = (veh.fuel_full - veh.fuel_empty) / veh.capacity
        for (a, b), u in zip(zip(path[:-1], path[1:]), t.loads):
            z1 += inst.beta * inst.ship_rate * d(a, b) * n
            z2 += veh.emission_factor * (veh.fuel_empty + slope * u) * n * d(a, b)
    pen = plan.penalty_rate * plan.n_violations
    return z1 + pen, z2 + pen


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 200), st.integers(0, 2 ** 32 - 1))
def test_objectives_match_independent_summation(inst_seed, key_seed):
    inst = generate((3, 6, 3, 4), inst_seed)
    plan = decode(np.random.default_rng(key_seed).random(inst.chromosome_length), inst)
    cost, em = evaluate_breakdown(plan, inst)
    parts_c = (cost.fixed_dc + cost.fixed_fleet + cost.shipping_inbound + cost.shipping_outbound + cost.ordering
               + cost.inventory + cost.penalty)
    parts_e = em.inbound + em.outbound + em.dc + em.penalty
    assert parts_c == pytest.approx(cost.total, rel=1e-9)
    assert parts_e == pytest.approx(em.total, rel=1e-9)
    assert tuple(evaluate(plan, inst)) == pytest.approx(_oracle(plan, inst), rel=1e-9)
    if plan.feasible:
        assert cost.total >= 0 and em.total >= 0


def test_evaluator_counts_every_request_and_is_idempotent():
    inst = generate((2, 4, 3, 3), 3)
    plan = decode(np.random.default_rng(0).random(inst.chromosome_length), inst, 4)
    ev = Evaluator(inst)
    first, second = ev(plan), ev(plan)
    assert first == second == evaluate(plan, inst)
    assert ev.count == 2


def test_contract_error_on_mismatched_plan():
    small = generate((2, 4, 3, 3), 0)
    plan = decode(np.random.default_rng(0).random(small.chromosome_length), small, 4)
    with pytest.raises(ContractError):
        evaluate(plan, generate((2, 5, 3, 3), 0))
