"""Random-key representation and decoding into a concrete supply plan.

A chromosome holds ``|K| + |I| + |V_in| + |V_out|`` keys in (0, 1). Sorting
each sub-string ascending gives a priority order for DCs, retailers,
inbound vehicles and outbound vehicles. Decoding then

1. packs retailers (in priority order) into DCs (in priority order), moving
   to the next DC as soon as the current one would overflow;
2. picks, per operating DC, an order frequency ``n`` among the values
   feasible for both vehicle layers, sets ``q = demand / n``;
3. hands inbound vehicles to DCs in priority order until ``q`` is covered,
   and packs the DC's retailers first-fit into outbound vehicles;
4. sequences each tour in retailer-priority order and derives arc loads.

Anything that cannot be served is recorded on the plan and penalized at
evaluation time; decoding itself never fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .instance import Instance

DEFAULT_PENALTY_RATE = 1e7
N_MAX_CAP = 20
_CAP_TOL = 1e-9


@dataclass(frozen=True)
class Tour:
    dc: int
    vehicle: int
    retailers: tuple[int, ...]
    # loads[j] is carried on the j-th arc: dc->r0, r0->r1, ..., r_last->dc
    loads: tuple[float, ...]

    def nodes(self, instance: Instance) -> list[int]:
        dcn = instance.dc_node(self.dc)
        return [dcn] + [instance.retailer_node(i) for i in self.retailers] + [dcn]

    def arcs(self, instance: Instance) -> list[tuple[int, int]]:
        path = self.nodes(instance)
        return list(zip(path[:-1], path[1:]))


@dataclass(frozen=True)
class Plan:
    open_dcs: tuple[int, ...]
    assignment: tuple[int, ...]  # retailer -> dc, -1 when not assigned
    order_freq: tuple[tuple[int, int], ...]  # (dc, n_k)
    order_qty: tuple[tuple[int, float], ...]  # (dc, q_k)
    inbound_trips: tuple[tuple[int, tuple[tuple[int, float], ...]], ...]  # (dc, ((vehicle, load), ...))
    tours: tuple[Tour, ...]
    unassigned: tuple[int, ...] = ()
    unserved: tuple[int, ...] = ()
    penalty_rate: float = field(default=DEFAULT_PENALTY_RATE, compare=False)

    @property
    def feasible(self) -> bool:
        return not self.unassigned and not self.unserved

    @property
    def n_violations(self) -> int:
        return len(self.unassigned) + len(self.unserved)

    @property
    def freq(self) -> dict[int, int]:
        return dict(self.order_freq)

    @property
    def qty(self) -> dict[int, float]:
        return dict(self.order_qty)

    @property
    def inbound(self) -> dict[int, tuple[tuple[int, float], ...]]:
        return dict(self.inbound_trips)

    def retailers_of(self, k: int) -> list[int]:
        return [i for i, d in enumerate(self.assignment) if d == k]


def empty_plan(instance: Instance, penalty_rate: float = DEFAULT_PENALTY_RATE) -> Plan:
    return Plan((), (-1,) * instance.n_retailers, (), (), (), (), penalty_rate=penalty_rate)


def priority_order(keys: Sequence[float]) -> list[int]:
    """Indices sorted by ascending key, ties broken by lower index."""
    if len(keys) == 0:
        raise ValueError("priority_order needs at least one key")
    return [int(i) for i in np.argsort(np.asarray(keys, dtype=float), kind="stable")]


def split_keys(keys: Sequence[float], instance: Instance) -> tuple[np.ndarray, ...]:
    keys = np.asarray(keys, dtype=float)
    if keys.shape != (instance.chromosome_length,):
        raise ValueError(f"chromosome length {keys.shape} does not match instance ({instance.chromosome_length},)")
    bounds = np.cumsum(instance.size)[:-1]
    return tuple(np.split(keys, bounds))


def assign_retailers(
    retailer_order: Sequence[int], dc_order: Sequence[int], instance: Instance
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Next-fit packing of retailers into DCs; returns (assignment, unassigned)."""
    mu = instance.demand_means
    caps = [d.capacity for d in instance.dc_sites]
    assignment = [-1] * instance.n_retailers
    pos = 0
    used = 0.0
    for i in retailer_order:
        while pos < len(dc_order):
            k = dc_order[pos]
            if used + mu[i] <= caps[k] * (1 + _CAP_TOL):
                assignment[i] = k
                used += mu[i]
                break
            pos += 1
            used = 0.0
        else:
            break
    unassigned = tuple(i for i in retailer_order if assignment[i] < 0)
    return tuple(assignment), unassigned


def vehicle_count_table(annual_demand: float, capacities: Sequence[float], n_max: int) -> list[int | None]:
    """Minimum number of vehicles (largest first) covering ``demand / n`` for n = 1..n_max.

    ``None`` marks frequencies the whole fleet cannot cover.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    caps = sorted(capacities, reverse=True)
    cum = np.cumsum(caps) if caps else np.zeros(0)
    table: list[int | None] = []
    for n in range(1, n_max + 1):
        need = annual_demand / n
        idx = int(np.searchsorted(cum, need * (1 - _CAP_TOL)))
        table.append(idx + 1 if idx < len(caps) else None)
    return table


def default_n_max(instance: Instance) -> int:
    min_cap = min(v.capacity for v in instance.outbound_vehicles)
    return max(1, min(N_MAX_CAP, math.ceil(float(instance.demand_means.sum()) / min_cap)))


def frequency_cells(n_max: int) -> int:
    """Resolution of the frequency sub-key: divisible by every option count <= n_max."""
    return math.lcm(*range(1, n_max + 1))


def subkey_scale(n_dcs: int) -> float:
    """Scale of the frequency sub-key ``frac(scale * key)``.

    With one slot of width ``1/|K|`` per DC, any DC order can be combined
    with any frequency choice, and blending two nearby keys keeps the
    sub-key monotone, so children tend to inherit their parents' frequency.
    """
    return float(max(1, n_dcs))


def frequency_cell(key: float, cells: int, scale: float = 1.0) -> int:
    u = (key * scale) % 1.0
    return min(int(u * cells), cells - 1)


def frequency_index(key: float, n_options: int, n_max: int, scale: float = 1.0) -> int:
    """Index into the feasible-frequency list picked by a DC key."""
    cells = frequency_cells(n_max)
    return frequency_cell(key, cells, scale) * n_options // cells


def two_opt(seq: list[int], dist: Callable[[int, int], float], depot: int) -> list[int]:
    """Plain 2-opt on a closed tour through ``depot``; returns an improved order."""
    best = list(seq)
    if len(best) < 3:
        return best
    improved = True
    while improved:
        improved = False
        path = [depot] + best + [depot]
        for a in range(len(path) - 3):
            for b in range(a + 2, len(path) - 1):
                delta = (
                    dist(path[a], path[b]) + dist(path[a + 1], path[b + 1])
                    - dist(path[a], path[a + 1]) - dist(path[b], path[b + 1])
                )
                if delta < -1e-12:
                    path[a + 1 : b + 1] = reversed(path[a + 1 : b + 1])
                    best = path[1:-1]
                    improved = True
                    break
            if improved:
                break
    return best


class Decoder:
    """Decodes chromosomes for one instance; caches per-demand vehicle tables."""

    def __init__(self, instance: Instance, n_max: int | None = None,
                 penalty_rate: float = DEFAULT_PENALTY_RATE, use_two_opt: bool = False):
        self.instance = instance
        self.n_max = default_n_max(instance) if n_max is None else int(n_max)
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        self.penalty_rate = penalty_rate
        self.use_two_opt = use_two_opt
        self.mu = instance.demand_means.tolist()
        self.in_caps = [v.capacity for v in instance.inbound_vehicles]
        self.out_caps = [v.capacity for v in instance.outbound_vehicles]
        self.cells = frequency_cells(self.n_max)
        self.subkey_scale = subkey_scale(instance.n_dcs)
        self._freq_cache: dict[float, tuple[int, ...]] = {}

    def feasible_frequencies(self, demand: float) -> tuple[int, ...]:
        """Order frequencies feasible for both the inbound and outbound fleet."""
        hit = self._freq_cache.get(demand)
        if hit is None:
            t_in = vehicle_count_table(demand, self.in_caps, self.n_max)
            t_out = vehicle_count_table(demand, self.out_caps, self.n_max)
            hit = tuple(n for n in range(1, self.n_max + 1) if t_in[n - 1] is not None and t_out[n - 1] is not None)
            self._freq_cache[demand] = hit
        return hit

    def dc_demands(self, assignment: Sequence[int]) -> dict[int, float]:
        out: dict[int, float] = {}
        for i, k in enumerate(assignment):
            if k >= 0:
                out[k] = out.get(k, 0.0) + self.mu[i]
        return out

    def decode(self, keys: Sequence[float]) -> Plan:
        dc_keys, r_keys, vin_keys, vout_keys = split_keys(keys, self.instance)
        cells = [frequency_cell(float(key), self.cells, self.subkey_scale) for key in dc_keys]
        return self.decode_orders(priority_order(dc_keys), priority_order(r_keys), priority_order(vin_keys),
                                  priority_order(vout_keys), cells)

    def decode_orders(self, dc_order: Sequence[int], r_order: Sequence[int], vin_order: Sequence[int],
                      vout_order: Sequence[int], cells: Sequence[int]) -> Plan:
        """Decode from the four priority orders and each DC's frequency cell."""
        assignment, unassigned = assign_retailers(r_order, dc_order, self.instance)
        freq: dict[int, int] = {}
        for k, dem in self.dc_demands(assignment).items():
            options = self.feasible_frequencies(dem)
            if options:
                freq[k] = options[cells[k] * len(options) // self.cells]
        return self.build(dc_order, r_order, assignment, unassigned, freq, vin_order, vout_order)

    def build(
        self,
        dc_order: Sequence[int],
        retailer_order: Sequence[int],
        assignment: Sequence[int],
        unassigned: Sequence[int],
        freq: dict[int, int],
        vin_order: Sequence[int],
        vout_order: Sequence[int],
    ) -> Plan:
        """Allocate vehicles and tours given assignment and chosen frequencies.

        DCs without an entry in ``freq`` have no feasible frequency; their
        retailers end up unserved.
        """
        inst = self.instance
        mu = self.mu
        assignment = list(assignment)
        members: dict[int, list[int]] = {}
        for i in retailer_order:
            k = assignment[i]
            if k >= 0:
                members.setdefault(k, []).append(i)

        in_pool = list(vin_order)
        out_pool = list(vout_order)
        open_dcs: list[int] = []
        order_freq: list[tuple[int, int]] = []
        order_qty: list[tuple[int, float]] = []
        inbound: list[tuple[int, tuple[tuple[int, float], ...]]] = []
        tours: list[Tour] = []
        unserved: list[int] = []

        for k in dc_order:
            rets = members.get(k)
            if not rets:
                continue
            n = freq.get(k)
            demand = sum(mu[i] for i in rets)
            if n is None:
                unserved.extend(rets)
                for i in rets:
                    assignment[i] = -1
                continue
            q = demand / n

            taken: list[int] = []
            covered = 0.0
            for v in in_pool:
                if covered >= q * (1 - _CAP_TOL):
                    break
                taken.append(v)
                covered += self.in_caps[v]
            if covered < q * (1 - _CAP_TOL):
                unserved.extend(rets)
                for i in rets:
                    assignment[i] = -1
                continue
            for v in taken:
                in_pool.remove(v)
            trips = []
            remaining = q
            for v in taken:
                load = min(self.in_caps[v], remaining)
                trips.append((v, load))
                remaining -= load
            if remaining > 0:
                # rounding residue from the tolerance above lands on the last trip
                v, load = trips[-1]
                trips[-1] = (v, load + remaining)

            # first-fit packing of per-cycle deliveries into outbound vehicles
            loads_by_vehicle: dict[int, float] = {}
            stops: dict[int, list[int]] = {}
            vehicle_seq: list[int] = []
            for i in rets:
                deliver = mu[i] / n
                placed = False
                for v in vehicle_seq:
                    if loads_by_vehicle[v] + deliver <= self.out_caps[v] * (1 + _CAP_TOL):
                        loads_by_vehicle[v] += deliver
                        stops[v].append(i)
                        placed = True
                        break
                if not placed:
                    for v in out_pool:
                        if deliver <= self.out_caps[v] * (1 + _CAP_TOL):
                            out_pool.remove(v)
                            vehicle_seq.append(v)
                            loads_by_vehicle[v] = deliver
                            stops[v] = [i]
                            placed = True
                            break
                if not placed:
                    unserved.append(i)

            open_dcs.append(k)
            order_freq.append((k, n))
            order_qty.append((k, q))
            inbound.append((k, tuple(trips)))
            dc_node = inst.dc_node(k)
            for v in vehicle_seq:
                seq = stops[v]
                if self.use_two_opt:
                    seq = two_opt([inst.retailer_node(i) for i in seq], inst.distance, dc_node)
                    seq = [node - 1 - inst.n_dcs for node in seq]
                load = sum(mu[i] / n for i in seq)
                arc_loads = [load]
                for i in seq:
                    load -= mu[i] / n
                    arc_loads.append(max(load, 0.0))
                arc_loads[-1] = 0.0
                tours.append(Tour(k, v, tuple(seq), tuple(arc_loads)))

        return Plan(
            open_dcs=tuple(open_dcs),
            assignment=tuple(assignment),
            order_freq=tuple(order_freq),
            order_qty=tuple(order_qty),
            inbound_trips=tuple(inbound),
            tours=tuple(tours),
            unassigned=tuple(unassigned),
            unserved=tuple(unserved),
            penalty_rate=self.penalty_rate,
        )


def decode(
    chromosome: Sequence[float],
    instance: Instance,
    n_max: int | None = None,
    penalty_rate: float = DEFAULT_PENALTY_RATE,
    use_two_opt: bool = False,
) -> Plan:
    return Decoder(instance, n_max, penalty_rate, use_two_opt).decode(chromosome)


def validate_plan(plan: Plan, instance: Instance, tol: float = 1e-7) -> list[str]:
    """Re-derive the model constraints from a plan; returns the violations found."""
    errs: list[str] = []
    mu = instance.demand_means
    freq = plan.freq
    qty = plan.qty
    open_set = set(plan.open_dcs)
    n_ret = instance.n_retailers

    if len(plan.assignment) != n_ret:
        return [f"assignment has {len(plan.assignment)} entries for {n_ret} retailers"]
    for i, k in enumerate(plan.assignment):
        if k >= 0 and k not in open_set:
            errs.append(f"retailer {i} assigned to closed DC {k}")
    if plan.feasible and any(k < 0 for k in plan.assignment):
        errs.append("feasible plan leaves retailers unassigned")

    for k in plan.open_dcs:
        load = sum(mu[i] for i in plan.retailers_of(k))
        if load > instance.dc_sites[k].capacity * (1 + tol):
            errs.append(f"DC {k} capacity exceeded: {load} > {instance.dc_sites[k].capacity}")
        n = freq.get(k)
        if n is None or n < 1:
            errs.append(f"DC {k} has no order frequency")
            continue
        q = qty[k]
        if abs(n * q - load) > tol * max(1.0, load):
            errs.append(f"DC {k}: n*q = {n * q} differs from assigned demand {load}")
        shipped = sum(u for _, u in plan.inbound.get(k, ()))
        if abs(shipped - q) > tol * max(1.0, q):
            errs.append(f"DC {k}: inbound shipments {shipped} != order quantity {q}")
        if not plan.inbound.get(k):
            errs.append(f"DC {k}: no inbound vehicle dispatched")

    used_in: set[int] = set()
    for k, trips in plan.inbound_trips:
        for v, u in trips:
            if v in used_in:
                errs.append(f"inbound vehicle {v} used twice")
            used_in.add(v)
            if u > instance.inbound_vehicles[v].capacity * (1 + tol) or u < 0:
                errs.append(f"inbound vehicle {v} load {u} outside capacity")

    visited: dict[int, int] = {}
    used_out: set[int] = set()
    for tour in plan.tours:
        if tour.vehicle in used_out:
            errs.append(f"outbound vehicle {tour.vehicle} used twice")
        used_out.add(tour.vehicle)
        cap = instance.outbound_vehicles[tour.vehicle].capacity
        if len(tour.loads) != len(tour.retailers) + 1:
            errs.append(f"tour of vehicle {tour.vehicle}: wrong number of arc loads")
            continue
        if not tour.retailers:
            errs.append(f"tour of vehicle {tour.vehicle} visits no retailer")
        n = freq.get(tour.dc, 0)
        for j, i in enumerate(tour.retailers):
            visited[i] = visited.get(i, 0) + 1
            if plan.assignment[i] != tour.dc:
                errs.append(f"retailer {i} served from DC {tour.dc} but assigned to {plan.assignment[i]}")
            if n and abs((tour.loads[j] - tour.loads[j + 1]) - mu[i] / n) > tol * max(1.0, mu[i]):
                errs.append(f"tour of vehicle {tour.vehicle}: load drop at retailer {i} != mu/n")
        if abs(tour.loads[-1]) > tol:
            errs.append(f"tour of vehicle {tour.vehicle} returns loaded")
        if max(tour.loads) > cap * (1 + tol) or min(tour.loads) < -tol:
            errs.append(f"tour of vehicle {tour.vehicle} load outside [0, {cap}]")
    for i in range(n_ret):
        if plan.assignment[i] >= 0 and i not in plan.unserved and visited.get(i, 0) != 1:
            errs.append(f"retailer {i} visited {visited.get(i, 0)} times")
    return errs


def plan_to_dict(plan: Plan, objectives: tuple[float, float] | None = None) -> dict:
    return {
        "open_dcs": list(plan.open_dcs),
        "assignment": list(plan.assignment),
        "orders": [
            {"dc": k, "n": n, "q": plan.qty[k], "inbound": [[v, u] for v, u in plan.inbound.get(k, ())]}
            for k, n in plan.order_freq
        ],
        "tours": [
            {"dc": t.dc, "vehicle": t.vehicle, "retailers": list(t.retailers), "loads": list(t.loads)}
            for t in plan.tours
        ],
        "unassigned": list(plan.unassigned),
        "unserved": list(plan.unserved),
        "objectives": list(objectives) if objectives is not None else None,
        "feasible": plan.feasible,
    }


def plan_from_dict(doc: dict, penalty_rate: float = DEFAULT_PENALTY_RATE) -> Plan:
    orders = doc.get("orders", [])
    return Plan(
        open_dcs=tuple(doc["open_dcs"]),
        assignment=tuple(doc["assignment"]),
        order_freq=tuple((o["dc"], int(o["n"])) for o in orders),
        order_qty=tuple((o["dc"], float(o["q"])) for o in orders),
        inbound_trips=tuple((o["dc"], tuple((int(v), float(u)) for v, u in o["inbound"])) for o in orders),
        tours=tuple(
            Tour(t["dc"], t["vehicle"], tuple(t["retailers"]), tuple(float(x) for x in t["loads"]))
            for t in doc.get("tours", [])
        ),
        unassigned=tuple(doc.get("unassigned", [])),
        unserved=tuple(doc.get("unserved", [])),
        penalty_rate=penalty_rate,
    )
