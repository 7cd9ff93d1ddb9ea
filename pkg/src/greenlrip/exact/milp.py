"""Linearized mixed-integer model of the bi-objective problem.

Nonlinear terms are removed in three passes:

* continuous x integer products (``q*n``, inbound ``u*n``, outbound ``u*nu``)
  get a McCormick envelope over their variable bounds;
* binary products (``t*t'``) get the standard product constraints;
* the safety-stock square root over the assignment pattern becomes a sum
  over subset indicators ``tau_{j,k}`` with precomputed subset sums.

Products of a binary with an integer (``r*n``, ``w*nu``) and of a binary
with a bounded linear expression (the scenario terms of the inventory) are
modelled exactly with bound-based big-M constraints. The order frequency is
written as a one-hot choice ``lam_{k,n}`` so the per-cycle delivery
``mu_i / n_k`` stays linear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from ..decoder import Plan, default_n_max
from ..inventory import classify, safety_stock
from ..instance import Instance

DEFAULT_SUBSET_CAP = 16
KINDS = ("continuous", "integer", "binary")
SENSES = ("<=", ">=", "=")


class ModelSizeError(ValueError):
    pass


class LinExpr:
    """Sparse linear expression ``sum(coef * var) + constant``."""

    __slots__ = ("terms", "constant")

    def __init__(self, terms: Mapping[str, float] | None = None, constant: float = 0.0):
        self.terms: dict[str, float] = dict(terms or {})
        self.constant = float(constant)

    @classmethod
    def var(cls, name: str, coef: float = 1.0) -> LinExpr:
        return cls({name: coef})

    def copy(self) -> LinExpr:
        return LinExpr(self.terms, self.constant)

    def add(self, name: str, coef: float) -> LinExpr:
        if coef:
            self.terms[name] = self.terms.get(name, 0.0) + coef
        return self

    def __add__(self, other) -> LinExpr:
        out = self.copy()
        if isinstance(other, LinExpr):
            for n, c in other.terms.items():
                out.add(n, c)
            out.constant += other.constant
        else:
            out.constant += float(other)
        return out

    __radd__ = __add__

    def __neg__(self) -> LinExpr:
        return LinExpr({n: -c for n, c in self.terms.items()}, -self.constant)

    def __sub__(self, other) -> LinExpr:
        return self + (-other if isinstance(other, LinExpr) else -float(other))

    def __rsub__(self, other) -> LinExpr:
        return (-self) + other

    def __mul__(self, k: float) -> LinExpr:
        return LinExpr({n: c * k for n, c in self.terms.items()}, self.constant * k)

    __rmul__ = __mul__

    def value(self, values: Mapping[str, float]) -> float:
        return math.fsum([self.constant] + [c * values.get(n, 0.0) for n, c in self.terms.items()])


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    lb: float = 0.0
    ub: float = math.inf


@dataclass
class Constraint:
    name: str
    coeffs: dict[str, float]
    sense: str
    rhs: float

    def activity(self, values: Mapping[str, float]) -> float:
        return math.fsum(c * values.get(n, 0.0) for n, c in self.coeffs.items())

    def violation(self, values: Mapping[str, float]) -> float:
        lhs = self.activity(values)
        if self.sense == "<=":
            return max(0.0, lhs - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)

    def scale(self, values: Mapping[str, float]) -> float:
        return 1.0 + abs(self.rhs) + math.fsum(abs(c * values.get(n, 0.0)) for n, c in self.coeffs.items())


def make_constraint(name: str, lhs: LinExpr, sense: str, rhs: LinExpr | float = 0.0) -> Constraint:
    """Normalize ``lhs sense rhs`` to variables on the left, a constant on the right."""
    if sense not in SENSES:
        raise ValueError(f"unknown sense {sense!r}")
    expr = lhs - rhs
    coeffs = {n: c for n, c in expr.terms.items() if c != 0.0}
    return Constraint(name, coeffs, sense, -expr.constant)


@dataclass
class MilpModel:
    name: str = "lrip"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objectives: dict[str, LinExpr] = field(default_factory=dict)
    index: dict[str, int] = field(default_factory=dict)

    def add_var(self, name: str, kind: str = "continuous", lb: float = 0.0, ub: float = math.inf) -> str:
        if kind not in KINDS:
            raise ValueError(f"unknown variable kind {kind!r}")
        if name in self.index:
            raise ValueError(f"duplicate variable {name}")
        if kind == "binary":
            lb, ub = 0.0, 1.0
        if lb > ub:
            raise ValueError(f"{name}: lower bound {lb} above upper bound {ub}")
        self.index[name] = len(self.variables)
        self.variables.append(Variable(name, kind, float(lb), float(ub)))
        return name

    def add(self, constraint: Constraint) -> None:
        missing = [n for n in constraint.coeffs if n not in self.index]
        if missing:
            raise KeyError(f"constraint {constraint.name} references undeclared {missing[:3]}")
        self.constraints.append(constraint)

    def add_all(self, constraints: Iterable[Constraint]) -> None:
        for c in constraints:
            self.add(c)

    def constrain(self, name: str, lhs: LinExpr, sense: str, rhs: LinExpr | float = 0.0) -> None:
        self.add(make_constraint(name, lhs, sense, rhs))

    def family_counts(self) -> dict[str, int]:
        """Number of variables per name prefix (the part before the first underscore)."""
        out: dict[str, int] = {}
        for v in self.variables:
            fam = v.name.split("_", 1)[0]
            out[fam] = out.get(fam, 0) + 1
        return out

    def objective_value(self, which: str, values: Mapping[str, float]) -> float:
        return self.objectives[which].value(values)

    def compile(self) -> CompiledModel:
        """Sparse matrix form for fast repeated checks."""
        col = self.index
        rows, cols, data = [], [], []
        for r, c in enumerate(self.constraints):
            for n, a in c.coeffs.items():
                rows.append(r)
                cols.append(col[n])
                data.append(a)
        shape = (len(self.constraints), len(self.variables))
        obj = np.zeros((len(self.objectives), len(self.variables)))
        for r, expr in enumerate(self.objectives.values()):
            for n, a in expr.terms.items():
                obj[r, col[n]] += a
        return CompiledModel(
            names=[v.name for v in self.variables],
            matrix=sparse.csr_matrix((data, (rows, cols)), shape=shape),
            abs_matrix=sparse.csr_matrix((np.abs(data), (rows, cols)), shape=shape),
            sense=np.array([c.sense for c in self.constraints]),
            rhs=np.array([c.rhs for c in self.constraints], dtype=float),
            lb=np.array([v.lb for v in self.variables]),
            ub=np.array([v.ub for v in self.variables]),
            integral=np.array([v.kind != "continuous" for v in self.variables]),
            objectives=obj,
            objective_constants=np.array([e.constant for e in self.objectives.values()]),
            constraint_names=[c.name for c in self.constraints],
        )

    def check(self, values: Mapping[str, float], tol: float = 1e-6) -> list[str]:
        """Violated bounds, integrality and constraints, each scaled by its magnitude."""
        errs = []
        unknown = set(values) - set(self.index)
        if unknown:
            errs.append(f"values for undeclared variables: {sorted(unknown)[:5]}")
        for v in self.variables:
            x = values.get(v.name, 0.0)
            slack = tol * (1.0 + abs(x))
            if x < v.lb - slack or x > v.ub + slack:
                errs.append(f"{v.name}={x} outside [{v.lb}, {v.ub}]")
            if v.kind != "continuous" and abs(x - round(x)) > tol:
                errs.append(f"{v.name}={x} is not integral")
        for c in self.constraints:
            viol = c.violation(values)
            if viol > tol * c.scale(values):
                errs.append(f"{c.name}: violated by {viol:.3g}")
        return errs


@dataclass
class CompiledModel:
    names: list[str]
    matrix: sparse.csr_matrix
    abs_matrix: sparse.csr_matrix
    sense: np.ndarray
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integral: np.ndarray
    objectives: np.ndarray
    objective_constants: np.ndarray
    constraint_names: list[str]

    def vector(self, values: Mapping[str, float]) -> np.ndarray:
        x = np.zeros(len(self.names))
        pos = {n: j for j, n in enumerate(self.names)}
        for n, v in values.items():
            x[pos[n]] = v
        return x

    def objective_values(self, x: np.ndarray) -> np.ndarray:
        return self.objectives @ x + self.objective_constants

    def check(self, x: np.ndarray, tol: float = 1e-6) -> list[str]:
        """Same semantics as :meth:`MilpModel.check` on a dense value vector."""
        errs = []
        slack = tol * (1.0 + np.abs(x))
        for j in np.flatnonzero((x < self.lb - slack) | (x > self.ub + slack)):
            errs.append(f"{self.names[j]}={x[j]} outside [{self.lb[j]}, {self.ub[j]}]")
        for j in np.flatnonzero(self.integral & (np.abs(x - np.round(x)) > tol)):
            errs.append(f"{self.names[j]}={x[j]} is not integral")
        lhs = self.matrix @ x
        scale = 1.0 + np.abs(self.rhs) + self.abs_matrix @ np.abs(x)
        viol = np.where(self.sense == "<=", lhs - self.rhs,
                        np.where(self.sense == ">=", self.rhs - lhs, np.abs(lhs - self.rhs)))
        for r in np.flatnonzero(viol > tol * scale):
            errs.append(f"{self.constraint_names[r]}: violated by {viol[r]:.3g}")
        return errs


# ---------------------------------------------------------------- propositions

def linearize_bilinear(a: float, b: float, q: str = "q", n: str = "n", z: str = "sig",
                       tag: str = "mc") -> list[Constraint]:
    """McCormick envelope of ``z = q * n`` for ``q in [0, a]`` and ``n in [0, b]``."""
    if a <= 0 or b <= 0:
        raise ValueError("McCormick bounds must be positive")
    vq, vn, vz = LinExpr.var(q), LinExpr.var(n), LinExpr.var(z)
    return [
        make_constraint(f"{tag}_lo_{z}", vz, ">=", 0.0),
        make_constraint(f"{tag}_q_{z}", vz, "<=", b * vq),
        make_constraint(f"{tag}_n_{z}", vz, "<=", a * vn),
        make_constraint(f"{tag}_hi_{z}", vz, ">=", b * vq + a * vn - a * b),
    ]


def linearize_binary_product(names: Sequence[str], z: str, tag: str = "prod") -> list[Constraint]:
    """``z = prod(names)`` for binaries: ``z <= x_i`` and ``z >= sum(x) - (n - 1)``."""
    if len(names) < 2:
        raise ValueError("a product needs at least two binaries")
    vz = LinExpr.var(z)
    out = [make_constraint(f"{tag}_le_{z}_{j}", vz, "<=", LinExpr.var(x)) for j, x in enumerate(names)]
    total = LinExpr({x: 1.0 for x in names})
    out.append(make_constraint(f"{tag}_ge_{z}", vz, ">=", total - (len(names) - 1)))
    return out


def binary_times_expr(z: str, binary: LinExpr, expr: LinExpr, lo: float, hi: float, tag: str) -> list[Constraint]:
    """Exact ``z = binary * expr`` for a 0/1-valued ``binary`` and ``expr in [lo, hi]``."""
    vz = LinExpr.var(z)
    return [
        make_constraint(f"{tag}_a", vz, "<=", hi * binary),
        make_constraint(f"{tag}_b", vz, ">=", lo * binary),
        make_constraint(f"{tag}_c", vz, "<=", expr - lo * (1 - binary)),
        make_constraint(f"{tag}_d", vz, ">=", expr - hi * (1 - binary)),
    ]


def subset_sums(weights: Sequence[float]) -> list[float]:
    """``b_j`` for every subset ``j`` encoded as a bitmask over ``weights``."""
    sums = [0.0]
    for w in weights:
        sums = sums + [s + w for s in sums]
    return sums


def linearize_sqrt(sigma2: Sequence[float], lead: float, y: Sequence[str], tau: str = "tau_j{j}",
                   subset_cap: int = DEFAULT_SUBSET_CAP) -> tuple[list[float], list[Constraint], LinExpr]:
    """Subset-indicator form of ``sqrt(lead * sum(sigma2_i * y_i))``.

    ``tau`` is a name template with a ``{j}`` field for the subset bitmask.
    Returns the subset sums ``b_j``, the indicator constraints tying each
    ``tau_j`` to the pattern of ``y`` (plus one exactly-one row), and the
    linear replacement ``sum_j sqrt(lead * b_j) * tau_j``.
    """
    n = len(sigma2)
    if n != len(y):
        raise ValueError("sigma2 and y differ in length")
    if n > subset_cap:
        raise ModelSizeError(f"{n} retailers exceed the subset cap {subset_cap}; use the heuristic solvers")
    b = subset_sums(sigma2)
    cons = []
    value = LinExpr()
    for j, bj in enumerate(b):
        t = tau.format(j=j)
        match = LinExpr()
        for i, yi in enumerate(y):
            if j >> i & 1:
                match.add(yi, 1.0)
            else:
                match = match + (1 - LinExpr.var(yi))
        cons.append(make_constraint(f"sqa_{t}", match, ">=", n * LinExpr.var(t)))
        cons.append(make_constraint(f"sqb_{t}", match, "<=", LinExpr.var(t) + (n - 1)))
        value.add(t, math.sqrt(lead * bj))
    cons.append(make_constraint("sq1_" + tau.format(j="all"),
                                LinExpr({tau.format(j=j): 1.0 for j in range(len(b))}), "=", 1.0))
    return b, cons, value


# ---------------------------------------------------------------- names

def node_label(instance: Instance, node: int) -> str:
    if node == 0:
        return "s0"
    if node <= instance.n_dcs:
        return f"k{node - 1}"
    return f"i{node - 1 - instance.n_dcs}"


def outbound_arcs(instance: Instance) -> list[tuple[int, int]]:
    """DC->retailer, retailer->DC and retailer->retailer node pairs."""
    dcs = [instance.dc_node(k) for k in range(instance.n_dcs)]
    rets = [instance.retailer_node(i) for i in range(instance.n_retailers)]
    arcs = [(d, r) for d in dcs for r in rets] + [(r, d) for r in rets for d in dcs]
    arcs += [(a, b) for a in rets for b in rets if a != b]
    return arcs


def w_in(k: int, v: int) -> str:
    return f"w_s0_k{k}_vi{v}"


def w_out(instance: Instance, a: int, b: int, v: int) -> str:
    return f"w_{node_label(instance, a)}_{node_label(instance, b)}_vo{v}"


def _suffix(name: str) -> str:
    return name.split("_", 1)[1]


# ---------------------------------------------------------------- model

def build_milp(instance: Instance, subset_cap: int = DEFAULT_SUBSET_CAP, n_max: int | None = None) -> MilpModel:
    """Linearized model with both objectives as linear rows."""
    n_ret = instance.n_retailers
    if n_ret > subset_cap:
        raise ModelSizeError(f"{n_ret} retailers exceed the subset cap {subset_cap}; use the heuristic solvers")
    n_max = (default_n_max(instance) if n_ret else 1) if n_max is None else n_max
    K, I = range(instance.n_dcs), range(n_ret)
    VI, VO = range(len(instance.inbound_vehicles)), range(len(instance.outbound_vehicles))
    dcs, vin, vout = instance.dc_sites, instance.inbound_vehicles, instance.outbound_vehicles
    mu, var = instance.demand_means.tolist(), instance.demand_vars.tolist()
    dist = instance.dist_list
    z_a = instance.z_alpha
    mu_total = math.fsum(mu)
    max_out = max((v.capacity for v in vout), default=0.0)
    big_m = max(instance.big_m, mu_total + max_out + 1.0)
    arcs = outbound_arcs(instance)

    m = MilpModel(name=instance.name or "lrip")
    for k in K:
        m.add_var(f"x_k{k}", "binary")
        for i in I:
            m.add_var(f"y_i{i}_k{k}", "binary")
    inv = {}
    for k in K:
        a_k = dcs[k].capacity
        m.add_var(f"n_k{k}", "integer", 0, n_max)
        for n in range(1, n_max + 1):
            m.add_var(f"lam_k{k}_n{n}", "binary")
        m.add_var(f"q_k{k}", "continuous", 0, a_k)
        m.add_var(f"sig_k{k}", "continuous", 0, a_k * n_max)
        for name in (f"t_k{k}", f"tp_k{k}", f"th_k{k}"):
            m.add_var(name, "binary")
    for k in K:
        for v in VI:
            m.add_var(w_in(k, v), "binary")
            m.add_var(f"u_s0_k{k}_vi{v}", "continuous", 0, vin[v].capacity)
            m.add_var(f"r_k{k}_vi{v}", "binary")
            m.add_var(f"rho_k{k}_vi{v}", "continuous", 0, n_max)
            m.add_var(f"psi_k{k}_vi{v}", "continuous", 0, vin[v].capacity * n_max)
        for v in VO:
            m.add_var(f"r_k{k}_vo{v}", "binary")
            m.add_var(f"rho_k{k}_vo{v}", "continuous", 0, n_max)
    for v in VO:
        m.add_var(f"nu_vo{v}", "continuous", 0, n_max)
        for a, b in arcs:
            w = w_out(instance, a, b, v)
            m.add_var(w, "binary")
            m.add_var("u" + w[1:], "continuous", 0, vout[v].capacity)
            m.add_var("pi" + w[1:], "continuous", 0, n_max)
            m.add_var("om" + w[1:], "continuous", 0, vout[v].capacity * n_max)
        for i in I:
            m.add_var(f"m_i{i}_vo{v}", "continuous", 0, n_ret)

    def y_of(k):
        return LinExpr({f"y_i{i}_k{k}": mu[i] for i in I})

    def arcs_from(node, v):
        return LinExpr({w_out(instance, a, b, v): 1.0 for a, b in arcs if a == node})

    def arcs_into(node, v):
        return LinExpr({w_out(instance, a, b, v): 1.0 for a, b in arcs if b == node})

    V = LinExpr.var
    # (3)-(4) location and single sourcing
    for k in K:
        for i in I:
            m.constrain(f"c3_i{i}_k{k}", V(f"x_k{k}"), ">=", V(f"y_i{i}_k{k}"))
    for i in I:
        m.constrain(f"c4_i{i}", LinExpr({f"y_i{i}_k{k}": 1.0 for k in K}), "=", 1.0)
    # (5) every retailer is left exactly once
    for i in I:
        node = instance.retailer_node(i)
        total = LinExpr()
        for v in VO:
            total = total + arcs_from(node, v)
        m.constrain(f"c5_i{i}", total, "=", 1.0)
    # (6) an open DC is supplied by an inbound vehicle; (9) one dispatch per inbound vehicle
    for k in K:
        m.constrain(f"c6_k{k}", LinExpr({w_in(k, v): 1.0 for v in VI}), ">=", V(f"x_k{k}"))
    for v in VI:
        m.constrain(f"c9_vi{v}", LinExpr({w_in(k, v): 1.0 for k in K}), "<=", 1.0)
    # (7) MTZ subtour elimination
    for v in VO:
        for a, b in arcs:
            if a > instance.n_dcs and b > instance.n_dcs:
                i, j = a - 1 - instance.n_dcs, b - 1 - instance.n_dcs
                lhs = V(f"m_i{i}_vo{v}") - V(f"m_i{j}_vo{v}") + n_ret * V(w_out(instance, a, b, v))
                m.constrain(f"c7_i{i}_i{j}_vo{v}", lhs, "<=", n_ret - 1)
    # (8) route continuity; (10) one dispatch per outbound vehicle
    for v in VO:
        for node in list(range(1, instance.n_dcs + 1 + n_ret)):
            lhs = arcs_from(node, v) - arcs_into(node, v)
            if lhs.terms:
                m.constrain(f"c8_{node_label(instance, node)}_vo{v}", lhs, "=", 0.0)
        dispatch = LinExpr()
        for k in K:
            dispatch = dispatch + arcs_from(instance.dc_node(k), v)
        m.constrain(f"c10_vo{v}", dispatch, "<=", 1.0)
    # (11) a vehicle only visits retailers of the DC dispatching it
    for k in K:
        for i in I:
            for v in VO:
                lhs = arcs_from(instance.retailer_node(i), v) + arcs_from(instance.dc_node(k), v)
                m.constrain(f"c11_k{k}_i{i}_vo{v}", lhs - V(f"y_i{i}_k{k}"), "<=", 1.0)
    # (12) per-cycle delivery mu_i / n_k drops off at retailer i
    for k in K:
        for i in I:
            node = instance.retailer_node(i)
            net = LinExpr()
            for v in VO:
                for a, b in arcs:
                    if b == node:
                        net.add("u" + w_out(instance, a, b, v)[1:], 1.0)
                    elif a == node:
                        net.add("u" + w_out(instance, a, b, v)[1:], -1.0)
            per_cycle = LinExpr({f"lam_k{k}_n{n}": mu[i] / n for n in range(1, n_max + 1)})
            slack = big_m * (1 - V(f"y_i{i}_k{k}"))
            m.constrain(f"c12a_i{i}_k{k}", net, "<=", slack + per_cycle)
            m.constrain(f"c12b_i{i}_k{k}", net, ">=", -slack + per_cycle)
    # (13)-(14) loads within vehicle capacity on used arcs
    for k in K:
        for v in VI:
            m.constrain(f"c13_k{k}_vi{v}", V(f"u_s0_k{k}_vi{v}"), "<=", vin[v].capacity * V(w_in(k, v)))
    for v in VO:
        for a, b in arcs:
            w = w_out(instance, a, b, v)
            m.constrain(f"c14_{_suffix(w)}", V("u" + w[1:]), "<=", vout[v].capacity * V(w))
    # (15) DC capacity; (16) order quantity shipped inbound
    for k in K:
        m.constrain(f"c15_k{k}", y_of(k), "<=", dcs[k].capacity)
        m.constrain(f"c16_k{k}", V(f"q_k{k}"), "=", LinExpr({f"u_s0_k{k}_vi{v}": 1.0 for v in VI}))
    # (17)-(18) vehicle-to-DC assignment
    for k in K:
        for v in VI:
            m.constrain(f"c17_k{k}_vi{v}", V(f"r_k{k}_vi{v}"), "=", V(w_in(k, v)))
        for v in VO:
            m.constrain(f"c18_k{k}_vo{v}", V(f"r_k{k}_vo{v}"), "=", arcs_from(instance.dc_node(k), v))
    # one-hot order frequency for open DCs
    for k in K:
        lam = LinExpr({f"lam_k{k}_n{n}": 1.0 for n in range(1, n_max + 1)})
        m.constrain(f"frq_k{k}", lam, "=", V(f"x_k{k}"))
        m.constrain(f"nval_k{k}", V(f"n_k{k}"), "=",
                    LinExpr({f"lam_k{k}_n{n}": float(n) for n in range(1, n_max + 1)}))

    # linearization passes
    for k in K:
        a_k = dcs[k].capacity
        m.add_all(linearize_bilinear(a_k, n_max, f"q_k{k}", f"n_k{k}", f"sig_k{k}", tag="p1"))
        m.add_all(linearize_binary_product([f"t_k{k}", f"tp_k{k}"], f"th_k{k}", tag="p2"))
        for v in VI:
            m.add_all(linearize_bilinear(vin[v].capacity, n_max, f"u_s0_k{k}_vi{v}", f"n_k{k}",
                                         f"psi_k{k}_vi{v}", tag="p1"))
    for v in VO:
        for a, b in arcs:
            w = w_out(instance, a, b, v)
            m.add_all(linearize_bilinear(vout[v].capacity, n_max, "u" + w[1:], f"nu_vo{v}", "om" + w[1:],
                                         tag="p1"))
    # exact binary x bounded-integer products: rho = r * n, pi = w * nu
    for k in K:
        for v in VI:
            m.add_all(binary_times_expr(f"rho_k{k}_vi{v}", V(f"r_k{k}_vi{v}"), V(f"n_k{k}"), 0.0, n_max,
                                        f"bx_rho_k{k}_vi{v}"))
        for v in VO:
            m.add_all(binary_times_expr(f"rho_k{k}_vo{v}", V(f"r_k{k}_vo{v}"), V(f"n_k{k}"), 0.0, n_max,
                                        f"bx_rho_k{k}_vo{v}"))
    for v in VO:
        m.constrain(f"nu_vo{v}", V(f"nu_vo{v}"), "=", LinExpr({f"rho_k{k}_vo{v}": 1.0 for k in K}))
        for a, b in arcs:
            w = w_out(instance, a, b, v)
            m.add_all(binary_times_expr("pi" + w[1:], V(w), V(f"nu_vo{v}"), 0.0, n_max, f"bx_pi_{_suffix(w)}"))

    # safety stock through subset indicators, then scenario logic (19)-(22)
    for k in K:
        template = "tau_j{j}_k" + str(k)
        ys = [f"y_i{i}_k{k}" for i in I]
        for j in range(2**n_ret):
            m.add_var(template.format(j=j), "binary")
        _, cons, root = linearize_sqrt(var, dcs[k].lead_time, ys, tau=template, subset_cap=subset_cap)
        m.add_all(cons)
        safety = root * z_a
        s_hi = z_a * math.sqrt(dcs[k].lead_time * sum(var))
        s_lo, s_hi = min(0.0, s_hi), max(0.0, s_hi)
        dem = y_of(k)
        sig = V(f"sig_k{k}")
        t, tp, th = V(f"t_k{k}"), V(f"tp_k{k}"), V(f"th_k{k}")
        m.constrain(f"c19_k{k}", big_m * t, ">=", dem - sig)
        m.constrain(f"c20_k{k}", dem - sig, ">=", -big_m * (1 - t))
        m.constrain(f"c21_k{k}", big_m * tp, ">=", sig - dem - safety)
        m.constrain(f"c22_k{k}", sig - dem - safety, ">=", -big_m * (1 - tp))

        # inventory = sig - D + 2tD - 2t*sig + tS + pS - p*sig + pD with p = (1-t)(1-t')
        p = 1 - t - tp + th
        d_hi, sig_hi = mu_total, a_k * n_max
        prods = {
            "tD": (t, dem, 0.0, d_hi), "tsig": (t, sig, 0.0, sig_hi), "tS": (t, safety, s_lo, s_hi),
            "pS": (p, safety, s_lo, s_hi), "psig": (p, sig, 0.0, sig_hi), "pD": (p, dem, 0.0, d_hi),
        }
        for key, (bin_expr, expr, lo, hi) in prods.items():
            name = f"{key}_k{k}"
            m.add_var(name, "continuous", lo, hi)
            m.add_all(binary_times_expr(name, bin_expr, expr, lo, hi, f"bx_{name}"))
        inv[k] = (sig - dem + 2 * V(f"tD_k{k}") - 2 * V(f"tsig_k{k}") + V(f"tS_k{k}") + V(f"pS_k{k}")
                  - V(f"psig_k{k}") + V(f"pD_k{k}"))

    # objective rows
    z1, z2 = LinExpr(), LinExpr()
    for k in K:
        d = dcs[k]
        z1.add(f"x_k{k}", d.fixed_cost)
        for v in VI:
            z1.add(w_in(k, v), vin[v].fixed_cost)
        for v in VO:
            for i in I:
                z1.add(w_out(instance, instance.dc_node(k), instance.retailer_node(i), v), vout[v].fixed_cost)
        z1.add(f"n_k{k}", instance.beta * d.inbound_fixed_cost + d.order_cost)
        z1.add(f"sig_k{k}", instance.beta * d.supply_cost)
        z1 = z1 + instance.theta * d.holding_cost * inv[k]
        z2 = z2 + d.emission_weight * d.holding_cost * inv[k]
        d0 = dist[0][instance.dc_node(k)]
        for v in VI:
            veh = vin[v]
            z2.add(f"rho_k{k}_vi{v}", veh.emission_factor * 2 * veh.fuel_empty * d0)
            z2.add(f"psi_k{k}_vi{v}", veh.emission_factor * veh.load_slope * d0)
    for v in VO:
        veh = vout[v]
        for a, b in arcs:
            w = w_out(instance, a, b, v)
            z1.add("pi" + w[1:], instance.beta * instance.ship_rate * dist[a][b])
            z2.add("pi" + w[1:], veh.emission_factor * veh.fuel_empty * dist[a][b])
            z2.add("om" + w[1:], veh.emission_factor * veh.load_slope * dist[a][b])
    m.objectives = {"z1": z1, "z2": z2}
    return m


def induced_assignment(model: MilpModel, instance: Instance, plan: Plan) -> dict[str, float]:
    """Values of every model variable implied by a feasible decoded plan."""
    if not plan.feasible:
        raise ValueError("only feasible plans extend to model assignments")
    vals = {v.name: 0.0 for v in model.variables}
    mu, var = instance.demand_means.tolist(), instance.demand_vars.tolist()
    z_a = instance.z_alpha
    freq, qty = plan.freq, plan.qty

    for k in plan.open_dcs:
        vals[f"x_k{k}"] = 1.0
        n, q = freq[k], qty[k]
        vals[f"n_k{k}"] = float(n)
        vals[f"lam_k{k}_n{n}"] = 1.0
        vals[f"q_k{k}"] = q
        vals[f"sig_k{k}"] = n * q
        for v, load in plan.inbound[k]:
            vals[w_in(k, v)] = vals[f"r_k{k}_vi{v}"] = 1.0
            vals[f"u_s0_k{k}_vi{v}"] = load
            vals[f"rho_k{k}_vi{v}"] = float(n)
            vals[f"psi_k{k}_vi{v}"] = load * n
    for i, k in enumerate(plan.assignment):
        vals[f"y_i{i}_k{k}"] = 1.0
    for v in range(len(instance.outbound_vehicles)):
        for i in range(instance.n_retailers):
            vals[f"m_i{i}_vo{v}"] = 1.0
    for tour in plan.tours:
        n, v = freq[tour.dc], tour.vehicle
        vals[f"r_k{tour.dc}_vo{v}"] = 1.0
        vals[f"rho_k{tour.dc}_vo{v}"] = float(n)
        vals[f"nu_vo{v}"] = float(n)
        for pos, i in enumerate(tour.retailers, start=1):
            vals[f"m_i{i}_vo{v}"] = float(pos)
        for (a, b), load in zip(tour.arcs(instance), tour.loads):
            w = w_out(instance, a, b, v)
            vals[w] = 1.0
            vals["u" + w[1:]] = load
            vals["pi" + w[1:]] = float(n)
            vals["om" + w[1:]] = load * n

    for k in range(instance.n_dcs):
        members = [i for i, d in enumerate(plan.assignment) if d == k]
        mask = sum(1 << i for i in members)
        vals[f"tau_j{mask}_k{k}"] = 1.0
        dem = math.fsum(mu[i] for i in members)
        var_sum = math.fsum(var[i] for i in members)
        lead = instance.dc_sites[k].lead_time
        safety = safety_stock(var_sum, lead, z_a)
        sig = vals[f"sig_k{k}"]
        if k in freq:
            t, tp = classify(dem, var_sum, freq[k], qty[k], lead, z_a)
        else:
            t, tp = 0, 0
        p = (1 - t) * (1 - tp)
        vals[f"t_k{k}"], vals[f"tp_k{k}"], vals[f"th_k{k}"] = float(t), float(tp), float(t * tp)
        vals[f"tD_k{k}"], vals[f"tsig_k{k}"], vals[f"tS_k{k}"] = t * dem, t * sig, t * safety
        vals[f"pS_k{k}"], vals[f"psig_k{k}"], vals[f"pD_k{k}"] = p * safety, p * sig, p * dem
    return vals
