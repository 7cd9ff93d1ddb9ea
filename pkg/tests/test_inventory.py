import math
from statistics import NormalDist

import numpy as np
import pytest
from hypothesis import given, strategies as st

from greenlrip.inventory import (DcInventoryState, classify, expected_inventory, expected_inventory_closed_form,
                                 inventory_terms, safety_stock, z_quantile)


def _bisect_quantile(alpha):
    cdf = lambda z: 0.5 * (1 + math.erf(z / math.sqrt(2)))  # noqa: E731
    lo, hi = -10.0, 10.0
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if cdf(mid) < alpha else (lo, mid)
    return (lo + hi) / 2


@pytest.mark.parametrize("alpha,want", [(0.5, 0.0), (0.975, 1.959964), (0.95, 1.644854)])
def test_z_quantile_examples(alpha, want):
    assert z_quantile(alpha) == pytest.approx(want, abs=1e-6)
    assert z_quantile(alpha) == pytest.approx(_bisect_quantile(alpha), abs=1e-8)


@given(st.floats(0.001, 0.999))
def test_z_quantile_matches_bisection_oracle(alpha):
    assert z_quantile(alpha) == pytest.approx(_bisect_quantile(alpha), abs=1e-8)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
def test_z_quantile_domain(alpha):
    with pytest.raises(ValueError):
        z_quantile(alpha)


def _state_with_safety(mu, inflow, safety):
    # var chosen so that z*sqrt(l*var) == safety with l = 1, z = 1
    return DcInventoryState(mu, safety ** 2, 1, inflow, 1.0, 1.0)


def test_classify_examples():
    assert classify(1000, 150 ** 2, 1, 900, 1.0, 1.0) == (1, 0)
    assert classify(1000, 150 ** 2, 1, 1100, 1.0, 1.0) == (0, 0)
    assert classify(1000, 150 ** 2, 1, 1300, 1.0, 1.0) == (0, 1)


def test_classify_ties_resolve_to_zero():
    assert classify(1000, 150 ** 2, 2, 500, 1.0, 1.0) == (0, 0)
    assert classify(1000, 150 ** 2, 1, 1150, 1.0, 1.0) == (0, 0)


def test_expected_inventory_examples():
    assert expected_inventory(_state_with_safety(1000, 900, 150)) == pytest.approx(250)
    assert expected_inventory(_state_with_safety(1000, 1100, 150)) == pytest.approx(150)
    assert expected_inventory(_state_with_safety(1000, 1300, 150)) == pytest.approx(300)


def test_four_terms_match_closed_form_on_random_states():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        mu, inflow, safety = rng.uniform(1, 5000), rng.uniform(1, 5000), rng.uniform(0, 500)
        n = int(rng.integers(1, 20))
        state = DcInventoryState(mu, (safety / 1.5) ** 2 / 4.0, n, inflow / n, 4.0, 1.5)
        want = expected_inventory_closed_form(mu, state.inflow, state.safety)
        assert expected_inventory(state) == pytest.approx(want, rel=1e-9)
        assert expected_inventory(state) >= 0


@given(st.floats(1, 1e4), st.floats(0, 1e3), st.floats(0, 1e3))
def test_continuity_at_the_shortage_boundary(mu, safety, _):
    left = inventory_terms(mu, mu, safety, 1, 0)
    right = inventory_terms(mu, mu, safety, 0, 0)
    assert left == pytest.approx(right)


@given(st.floats(1, 1e4), st.floats(1, 1e4), st.floats(0, 1e3), st.floats(0, 1e3), st.floats(0.1, 20))
def test_monotone_in_variance_and_lead(mu, inflow, v1, dv, lead):
    z = NormalDist().inv_cdf(0.95)
    a = DcInventoryState(mu, v1, 1, inflow, lead, z)
    b = DcInventoryState(mu, v1 + dv, 1, inflow, lead, z)
    c = DcInventoryState(mu, v1, 1, inflow, lead * 1.5, z)
    assert expected_inventory(b) >= expected_inventory(a) - 1e-9
    assert expected_inventory(c) >= expected_inventory(a) - 1e-9


def test_safety_stock_formula():
    assert safety_stock(100.0, 4.0, 1.5) == pytest.approx(30.0)
