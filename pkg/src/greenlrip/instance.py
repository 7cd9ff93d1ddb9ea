"""Problem data for the green location-routing-inventory model.

Nodes are addressed by a single integer index: ``0`` is the supplier,
``1..|K|`` are the DC sites and ``|K|+1..|K|+|I|`` are the retailers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1

# Table 5 of the reference experiments: (|K|, |I|, |V_in|, |V_out|).
TABLE5_SIZES: tuple[tuple[int, int, int, int], ...] = (
    (2, 4, 3, 3),
    (2, 4, 4, 3),
    (2, 4, 3, 4),
    (3, 5, 3, 3),
    (3, 5, 4, 4),
    (3, 7, 3, 3),
    (4, 10, 5, 5),
    (5, 15, 7, 7),
    (6, 20, 9, 9),
    (7, 25, 11, 11),
    (8, 30, 13, 13),
    (10, 50, 15, 15),
)

Point = tuple[float, float]


class InvalidSizeError(ValueError):
    """Raised when an instance size has a zero or negative count."""


class SchemaError(ValueError):
    """Raised when an instance document is malformed or violates an invariant."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class DcSite:
    coord: Point
    fixed_cost: float
    inbound_fixed_cost: float
    order_cost: float
    supply_cost: float
    lead_time: float
    holding_cost: float
    capacity: float
    emission_weight: float


@dataclass(frozen=True)
class Retailer:
    coord: Point
    demand_mean: float
    demand_var: float


@dataclass(frozen=True)
class Vehicle:
    capacity: float
    fixed_cost: float
    fuel_empty: float
    fuel_full: float
    emission_factor: float

    @property
    def load_slope(self) -> float:
        """Extra fuel per distance per unit of load."""
        return (self.fuel_full - self.fuel_empty) / self.capacity


@dataclass(frozen=True)
class GeneratorConfig:
    """Distributions for the parameters the published table leaves open."""

    coord_range: float = 100.0
    ship_rate: float = 1.0
    inbound_capacity: tuple[float, float] = (800.0, 1500.0)
    outbound_capacity: tuple[float, float] = (400.0, 900.0)
    vehicle_fixed_cost: tuple[float, float] = (50.0, 100.0)
    fuel_empty: tuple[float, float] = (0.1, 0.2)
    fuel_full_ratio: tuple[float, float] = (1.5, 2.5)
    emission_factor: float = 2.6
    dc_emission_weight: tuple[float, float] = (0.5, 1.5)
    # DC capacity as a multiple of the average per-DC demand
    dc_capacity_share: tuple[float, float] = (0.8, 1.6)
    min_capacity_slack: float = 1.1
    beta: float = 1.0
    theta: float = 1.0
    alpha: float = 0.95


@dataclass(frozen=True)
class Instance:
    dc_sites: tuple[DcSite, ...]
    retailers: tuple[Retailer, ...]
    inbound_vehicles: tuple[Vehicle, ...]
    outbound_vehicles: tuple[Vehicle, ...]
    supplier_coord: Point = (0.0, 0.0)
    beta: float = 1.0
    theta: float = 1.0
    alpha: float = 0.95
    big_m: float = 0.0
    ship_rate: float = 1.0
    seed: int | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for attr in ("dc_sites", "retailers", "inbound_vehicles", "outbound_vehicles"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        if self.big_m <= 0:
            object.__setattr__(self, "big_m", default_big_m(self.retailers))

    @property
    def n_dcs(self) -> int:
        return len(self.dc_sites)

    @property
    def n_retailers(self) -> int:
        return len(self.retailers)

    @property
    def size(self) -> tuple[int, int, int, int]:
        return (self.n_dcs, self.n_retailers, len(self.inbound_vehicles), len(self.outbound_vehicles))

    @property
    def chromosome_length(self) -> int:
        return sum(self.size)

    def dc_node(self, k: int) -> int:
        return 1 + k

    def retailer_node(self, i: int) -> int:
        return 1 + self.n_dcs + i

    @cached_property
    def coords(self) -> np.ndarray:
        pts = [self.supplier_coord]
        pts += [d.coord for d in self.dc_sites]
        pts += [r.coord for r in self.retailers]
        return np.asarray(pts, dtype=float).reshape(-1, 2)

    @cached_property
    def distances(self) -> np.ndarray:
        """Euclidean distance matrix over all nodes (supplier, DCs, retailers)."""
        c = self.coords
        diff = c[:, None, :] - c[None, :, :]
        return np.sqrt((diff**2).sum(axis=-1))

    @cached_property
    def dist_list(self) -> list[list[float]]:
        return self.distances.tolist()

    def distance(self, a: int, b: int) -> float:
        return distance(tuple(self.coords[a]), tuple(self.coords[b]))

    def ship_cost(self, a: int, b: int) -> float:
        """Transportation cost c_{a,b}, proportional to distance."""
        return self.ship_rate * self.dist_list[a][b]

    @cached_property
    def demand_means(self) -> np.ndarray:
        return np.array([r.demand_mean for r in self.retailers], dtype=float)

    @cached_property
    def demand_vars(self) -> np.ndarray:
        return np.array([r.demand_var for r in self.retailers], dtype=float)

    @cached_property
    def z_alpha(self) -> float:
        from .inventory import z_quantile

        return z_quantile(self.alpha)

    def with_demand_scale(self, multiplier: float) -> Instance:
        """Copy of the instance with every mean demand multiplied by ``multiplier``."""
        if not multiplier > 0:
            raise ValueError(f"demand multiplier must be positive, got {multiplier}")
        retailers = tuple(replace(r, demand_mean=r.demand_mean * multiplier) for r in self.retailers)
        return replace(self, retailers=retailers, big_m=default_big_m(retailers), name=self.name)

    def validate(self) -> None:
        """Check the structural invariants, raising :class:`SchemaError`."""
        for key, seq in (
            ("dcs", self.dc_sites),
            ("retailers", self.retailers),
            ("vehicles_in", self.inbound_vehicles),
            ("vehicles_out", self.outbound_vehicles),
        ):
            if len(seq) < 1:
                raise SchemaError(key, "at least one entry required")
        for k, dc in enumerate(self.dc_sites):
            for fname in ("fixed_cost", "inbound_fixed_cost", "order_cost", "supply_cost",
                          "lead_time", "holding_cost", "capacity", "emission_weight"):
                if not getattr(dc, fname) > 0:
                    raise SchemaError(f"dcs[{k}].{fname}", "must be > 0")
        for i, r in enumerate(self.retailers):
            if not r.demand_mean > 0:
                raise SchemaError(f"retailers[{i}].demand_mean", "must be > 0")
            if not r.demand_var >= 0:
                raise SchemaError(f"retailers[{i}].demand_var", "must be >= 0")
        for key, fleet in (("vehicles_in", self.inbound_vehicles), ("vehicles_out", self.outbound_vehicles)):
            for v, veh in enumerate(fleet):
                if not veh.capacity > 0:
                    raise SchemaError(f"{key}[{v}].capacity", "must be > 0")
                if not veh.fixed_cost >= 0:
                    raise SchemaError(f"{key}[{v}].fixed_cost", "must be >= 0")
                if not veh.fuel_full >= veh.fuel_empty >= 0:
                    raise SchemaError(f"{key}[{v}].fuel_full", "need fuel_full >= fuel_empty >= 0")
                if not veh.emission_factor >= 0:
                    raise SchemaError(f"{key}[{v}].emission_factor", "must be >= 0")
        if not 0.5 < self.alpha < 1:
            raise SchemaError("weights.alpha", "must lie in (0.5, 1)")
        if sum(d.capacity for d in self.dc_sites) < sum(r.demand_mean for r in self.retailers):
            raise SchemaError("dcs", "total DC capacity is below total mean demand")


def default_big_m(retailers) -> float:
    return 2.0 * sum(r.demand_mean for r in retailers) or 1.0


def distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def generate(size: tuple[int, int, int, int], seed: int, config: GeneratorConfig | None = None) -> Instance:
    """Draw a random instance of the given ``(|K|, |I|, |V_in|, |V_out|)`` size."""
    cfg = config or GeneratorConfig()
    if len(size) != 4 or any(int(c) < 1 for c in size):
        raise InvalidSizeError(f"all counts must be >= 1, got {tuple(size)}")
    n_dc, n_ret, n_in, n_out = (int(c) for c in size)
    rng = np.random.default_rng(seed)

    def u(lo_hi, n):
        return rng.uniform(lo_hi[0], lo_hi[1], size=n)

    supplier = tuple(float(x) for x in rng.uniform(0, cfg.coord_range, size=2))
    dc_xy = rng.uniform(0, cfg.coord_range, size=(n_dc, 2))
    ret_xy = rng.uniform(0, cfg.coord_range, size=(n_ret, 2))

    f = u((500, 1000), n_dc)
    g = u((10, 15), n_dc)
    a = u((10, 15), n_dc)
    b = u((5, 10), n_dc)
    lead = u((6, 10), n_dc)
    h = u((5, 10), n_dc)
    eta = u(cfg.dc_emission_weight, n_dc)
    mu = u((400, 1500), n_ret)
    var = u((10, 100), n_ret)

    total = float(mu.sum())
    cap = u(cfg.dc_capacity_share, n_dc) * total / n_dc
    if cap.sum() < cfg.min_capacity_slack * total:
        cap *= cfg.min_capacity_slack * total / cap.sum()

    def fleet(n, cap_range):
        caps = u(cap_range, n)
        fixed = u(cfg.vehicle_fixed_cost, n)
        empty = u(cfg.fuel_empty, n)
        full = empty * u(cfg.fuel_full_ratio, n)
        return tuple(
            Vehicle(float(caps[v]), float(fixed[v]), float(empty[v]), float(full[v]), cfg.emission_factor)
            for v in range(n)
        )

    v_in = fleet(n_in, cfg.inbound_capacity)
    v_out = fleet(n_out, cfg.outbound_capacity)

    dcs = tuple(
        DcSite(
            coord=(float(dc_xy[k, 0]), float(dc_xy[k, 1])),
            fixed_cost=float(f[k]),
            inbound_fixed_cost=float(g[k]),
            order_cost=float(a[k]),
            supply_cost=float(b[k]),
            lead_time=float(lead[k]),
            holding_cost=float(h[k]),
            capacity=float(cap[k]),
            emission_weight=float(eta[k]),
        )
        for k in range(n_dc)
    )
    rets = tuple(
        Retailer(coord=(float(ret_xy[i, 0]), float(ret_xy[i, 1])), demand_mean=float(mu[i]), demand_var=float(var[i]))
        for i in range(n_ret)
    )
    inst = Instance(
        dc_sites=dcs,
        retailers=rets,
        inbound_vehicles=v_in,
        outbound_vehicles=v_out,
        supplier_coord=supplier,
        beta=cfg.beta,
        theta=cfg.theta,
        alpha=cfg.alpha,
        big_m=2.0 * total,
        ship_rate=cfg.ship_rate,
        seed=int(seed),
        name=f"lrip_{n_dc}_{n_ret}_{n_in}_{n_out}_s{seed}",
    )
    inst.validate()
    return inst


# ---------------------------------------------------------------------------
# persistence


def to_dict(inst: Instance) -> dict:
    def veh(v: Vehicle) -> dict:
        return {
            "capacity": v.capacity,
            "fixed_cost": v.fixed_cost,
            "fuel_empty": v.fuel_empty,
            "fuel_full": v.fuel_full,
            "emission_factor": v.emission_factor,
        }

    return {
        "schema": SCHEMA_VERSION,
        "name": inst.name,
        "seed": inst.seed,
        "supplier": list(inst.supplier_coord),
        "weights": {
            "beta": inst.beta,
            "theta": inst.theta,
            "alpha": inst.alpha,
            "big_m": inst.big_m,
            "ship_rate": inst.ship_rate,
        },
        "dcs": [
            {
                "coord": list(d.coord),
                "fixed_cost": d.fixed_cost,
                "inbound_fixed_cost": d.inbound_fixed_cost,
                "order_cost": d.order_cost,
                "supply_cost": d.supply_cost,
                "lead_time": d.lead_time,
                "holding_cost": d.holding_cost,
                "capacity": d.capacity,
                "emission_weight": d.emission_weight,
            }
            for d in inst.dc_sites
        ],
        "retailers": [
            {"coord": list(r.coord), "demand_mean": r.demand_mean, "demand_var": r.demand_var}
            for r in inst.retailers
        ],
        "vehicles_in": [veh(v) for v in inst.inbound_vehicles],
        "vehicles_out": [veh(v) for v in inst.outbound_vehicles],
    }


def _num(obj: dict, key: str, path: str) -> float:
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing field")
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise SchemaError(f"{path}.{key}", f"expected a number, got {val!r}")
    if not math.isfinite(val):
        raise SchemaError(f"{path}.{key}", "must be finite")
    return float(val)


def _point(obj, path: str) -> Point:
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise SchemaError(path, "expected a 2D point [x, y]")
    for c in obj:
        if isinstance(c, bool) or not isinstance(c, (int, float)):
            raise SchemaError(path, f"expected numeric coordinates, got {obj!r}")
    return (float(obj[0]), float(obj[1]))


def _list(doc: dict, key: str) -> list:
    if key not in doc:
        raise SchemaError(key, "missing field")
    if not isinstance(doc[key], list):
        raise SchemaError(key, "expected a list")
    return doc[key]


def from_dict(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise SchemaError("schema", f"unsupported schema version {doc.get('schema')!r}")

    dcs = []
    for k, d in enumerate(_list(doc, "dcs")):
        p = f"dcs[{k}]"
        dcs.append(
            DcSite(
                coord=_point(d.get("coord"), f"{p}.coord"),
                fixed_cost=_num(d, "fixed_cost", p),
                inbound_fixed_cost=_num(d, "inbound_fixed_cost", p),
                order_cost=_num(d, "order_cost", p),
                supply_cost=_num(d, "supply_cost", p),
                lead_time=_num(d, "lead_time", p),
                holding_cost=_num(d, "holding_cost", p),
                capacity=_num(d, "capacity", p),
                emission_weight=_num(d, "emission_weight", p),
            )
        )
    rets = []
    for i, r in enumerate(_list(doc, "retailers")):
        p = f"retailers[{i}]"
        rets.append(
            Retailer(
                coord=_point(r.get("coord"), f"{p}.coord"),
                demand_mean=_num(r, "demand_mean", p),
                demand_var=_num(r, "demand_var", p),
            )
        )

    def fleet(key):
        out = []
        for v, veh in enumerate(_list(doc, key)):
            p = f"{key}[{v}]"
            out.append(
                Vehicle(
                    capacity=_num(veh, "capacity", p),
                    fixed_cost=_num(veh, "fixed_cost", p),
                    fuel_empty=_num(veh, "fuel_empty", p),
                    fuel_full=_num(veh, "fuel_full", p),
                    emission_factor=_num(veh, "emission_factor", p),
                )
            )
        return out

    v_in = fleet("vehicles_in")
    v_out = fleet("vehicles_out")
    if "weights" not in doc or not isinstance(doc["weights"], dict):
        raise SchemaError("weights", "missing field")
    w = doc["weights"]
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise SchemaError("seed", "expected an integer or null")
    inst = Instance(
        dc_sites=tuple(dcs),
        retailers=tuple(rets),
        inbound_vehicles=tuple(v_in),
        outbound_vehicles=tuple(v_out),
        supplier_coord=_point(doc.get("supplier"), "supplier"),
        beta=_num(w, "beta", "weights"),
        theta=_num(w, "theta", "weights"),
        alpha=_num(w, "alpha", "weights"),
        big_m=_num(w, "big_m", "weights"),
        ship_rate=_num(w, "ship_rate", "weights") if "ship_rate" in w else 1.0,
        seed=seed,
        name=str(doc.get("name", "")),
    )
    inst.validate()
    return inst


def dumps(inst: Instance) -> str:
    return json.dumps(to_dict(inst), indent=1, sort_keys=True) + "\n"


def save(inst: Instance, path: str | Path) -> Path:
    from .io import atomic_write_text

    return atomic_write_text(path, dumps(inst))


def load(path: str | Path) -> Instance:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    return from_dict(doc)
