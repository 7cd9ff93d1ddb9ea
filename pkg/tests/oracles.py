"""Independent checks of the linearization building blocks, shared by unit and acceptance tests."""

from __future__ import annotations

import itertools
import math

import numpy as np

from greenlrip.exact import MilpModel, linearize_binary_product, linearize_sqrt


def binary_product_is_exact(n: int) -> bool:
    """For every 0/1 assignment of ``n`` factors, z is forced to their product."""
    names = [f"x{j}" for j in range(n)]
    cons = linearize_binary_product(names, "z")
    for bits in itertools.product((0, 1), repeat=n):
        vals = dict(zip(names, bits))
        allowed = [z for z in (0, 1) if all(c.violation({**vals, "z": z}) <= 1e-12 for c in cons)]
        if allowed != [math.prod(bits)]:
            return False
    return True


def sqrt_selection_is_exact(n):
    """Every y pattern admits exactly the one-hot tau of its own subset, and nothing else."""
    rng = np.random.default_rng(n)
    sigma2 = rng.uniform(1, 100, n).tolist()
    y = [f"y{i}" for i in range(n)]
    b, cons, value = linearize_sqrt(sigma2, 2.0, y)
    m = MilpModel()
    for name in y:
        m.add_var(name, "binary")
    for j in range(len(b)):
        m.add_var(f"tau_j{j}", "binary")
    m.add_all(cons)
    m.objectives = {"z1": value}
    c = m.compile()
    n_sub = len(b)
    ys = np.array(list(itertools.product((0, 1), repeat=n)))[:, ::-1]  # column i is bit i
    masks = ys @ (1 << np.arange(n))
    x = np.zeros((n_sub * n_sub, n + n_sub))
    x[:, :n] = np.repeat(ys, n_sub, axis=0)
    x[np.arange(n_sub * n_sub), n + np.tile(np.arange(n_sub), n_sub)] = 1
    lhs = (c.matrix @ x.T).T
    viol = np.where(c.sense == "<=", lhs - c.rhs, np.where(c.sense == ">=", c.rhs - lhs, np.abs(lhs - c.rhs)))
    ok = (viol <= 1e-9).all(axis=1).reshape(n_sub, n_sub)
    want_ok = np.zeros_like(ok)
    want_ok[np.arange(n_sub), masks] = True
    if not np.array_equal(ok, want_ok):
        return False
    got = (c.objectives @ x[ok.ravel()].T)[0]
    want = [math.sqrt(2.0 * sum(s for i, s in enumerate(sigma2) if mk >> i & 1)) for mk in masks]
    # all-zero tau is rejected by the exactly-one row
    zero = np.zeros(n + n_sub)
    return np.allclose(got, want, rtol=1e-12) and bool(c.check(zero))
