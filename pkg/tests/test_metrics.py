import numpy as np
import pytest
from hypothesis import given, strategies as st

from greenlrip.metrics import (Front, MetricError, clip_to_reference, diversification_metric, hypervolume,
                               ideal_and_ranges, mean_ideal_distance, merged_archive, metric_row,
                               quality_metric, reference_point, spacing_metric)
from greenlrip.pareto import non_dominated_mask

staircases = st.lists(st.integers(0, 50), min_size=1, max_size=10, unique=True).map(
    lambda xs: [(float(x), float(60 - x)) for x in sorted(xs)])


def test_quality_share_example():
    got = quality_metric({"A": [(1, 3)], "B": [(2, 2)], "C": [(3, 3)]})
    assert got == pytest.approx({"A": 0.5, "B": 0.5, "C": 0.0}, abs=1e-9)


def test_quality_identical_fronts():
    f = [(1, 4), (2, 3), (4, 1)]
    assert quality_metric([f, list(f), list(f), list(f)]) == pytest.approx([1, 1, 1, 1], abs=1e-9)


def test_quality_errors():
    with pytest.raises(MetricError):
        quality_metric([[(1, 1)]])
    with pytest.raises(MetricError):
        quality_metric([[], []])


@given(st.lists(staircases, min_size=2, max_size=4))
def test_quality_shares_cover_archive(fronts):
    shares = quality_metric(fronts)
    assert all(0 <= s <= 1 for s in shares) and sum(shares) >= 1 - 1e-12


def test_spacing_examples():
    assert spacing_metric([(0, 4), (1, 3), (2, 2)]) == pytest.approx(0, abs=1e-12)
    assert spacing_metric([(0, 4), (1, 4), (4, 4)]) == pytest.approx(1.0, abs=1e-9)
    assert spacing_metric([(0, 1), (1, 0)]) is None


@given(st.lists(st.integers(0, 100), min_size=3, max_size=10, unique=True),
       st.floats(0.1, 10), st.floats(-50, 50), st.floats(-50, 50))
def test_spacing_invariances(xs, s, dx, dy):
    pts = np.array([(x, (x * 7919) % 101) for x in sorted(xs)], dtype=float)
    base = spacing_metric(pts)
    assert spacing_metric(pts * s) == pytest.approx(base, rel=1e-9, abs=1e-12)
    assert spacing_metric(pts + (dx, dy)) == pytest.approx(base, rel=1e-7, abs=1e-9)


def test_mid_examples():
    assert mean_ideal_distance([(2, 3)], (2, 3), (1, 1)) == 0
    assert mean_ideal_distance([(0.6 * 5, 0.8 * 10)], (0, 0), (5, 10)) == pytest.approx(1.0, abs=1e-9)
    assert mean_ideal_distance([(1, 0), (0, 0)], (0, 0), (1, 1)) == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(MetricError):
        mean_ideal_distance([(1, 1)], (0, 0), (0, 1))


@given(staircases, st.integers(0, 9), st.floats(0, 1))
def test_mid_moves_toward_ideal(pts, j, t):
    best, ranges = np.array([0.0, 0.0]), np.array([60.0, 60.0])
    arr = np.array(pts)
    moved = arr.copy()
    moved[j % len(arr)] *= t
    assert mean_ideal_distance(moved, best, ranges) <= mean_ideal_distance(arr, best, ranges) + 1e-12


def test_dm_examples():
    assert diversification_metric([(5, 5)]) == 0
    assert diversification_metric([(0, 4), (3, 0)]) == pytest.approx(5.0, abs=1e-9)


def test_hypervolume_examples():
    assert hypervolume([(1, 1)], (2, 2)) == pytest.approx(1.0, abs=1e-9)
    assert hypervolume([(1, 2), (2, 1)], (3, 3)) == pytest.approx(3.0, abs=1e-9)
    assert hypervolume([], (3, 3)) == 0
    with pytest.raises(MetricError):
        hypervolume([(4, 1)], (3, 3))


@given(staircases, st.data())
def test_hypervolume_monotone_in_subsets(pts, data):
    sub = data.draw(st.lists(st.sampled_from(pts), min_size=1, unique=True))
    ref = (61.0, 61.0)
    assert hypervolume(sub, ref) <= hypervolume(pts, ref) + 1e-9


def test_hypervolume_against_monte_carlo():
    rng = np.random.default_rng(0)
    pts = rng.random((40, 2))
    pts = pts[non_dominated_mask(pts)]
    ref = np.array([1.0, 1.0])
    n = 100_000
    samples = rng.random((n, 2))
    hit = np.zeros(n, dtype=bool)
    for p in pts:
        hit |= np.all(samples >= p, axis=1)
    est = hit.mean()
    sigma = np.sqrt(est * (1 - est) / n)
    assert abs(hypervolume(pts, ref) - est) <= 3 * sigma


def test_front_from_candidates_filters_and_sorts():
    f = Front.from_candidates([(3, 1), (1, 3), (2, 2), (2, 2), (3, 3)])
    assert f.points == [(1, 3), (2, 2), (3, 1)]
    again = Front.from_dict(f.to_dict())
    assert again.points == f.points and again.incomplete is False


def test_archive_reference_and_rows():
    a, b = [(1, 3), (3, 1)], [(2, 2), (4, 4)]
    assert merged_archive([a, b]).tolist() == [[1, 3], [2, 2], [3, 1]]
    best, ranges = ideal_and_ranges([a, b])
    assert best.tolist() == [1, 1] and ranges.tolist() == [3, 3]
    ref = reference_point(a)
    assert ref == pytest.approx((3.2, 3.2))
    assert clip_to_reference(b, ref).tolist() == [[2, 2]]
    assert metric_row([], best, ranges) == {"SM": None, "MID": None, "DM": None}
    row = metric_row(a, best, ranges)
    assert row["SM"] is None and row["DM"] == pytest.approx(np.hypot(2, 2))
