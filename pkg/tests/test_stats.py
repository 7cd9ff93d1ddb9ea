import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from greenlrip.stats import (PairwiseRow, StatsError, chi_square_sf, compare_groups, group_by, kruskal_wallis,
                             normal_two_sided, pairwise_dunn)

group_sets = st.lists(st.lists(st.integers(-20, 20), min_size=1, max_size=6), min_size=2, max_size=5).filter(
    lambda gs: sum(map(len, gs)) >= 3)


def test_kruskal_examples():
    assert kruskal_wallis([(1, 2, 3), (4, 5, 6), (7, 8, 9)]).h == pytest.approx(7.2, abs=1e-9)
    r = kruskal_wallis([(1, 2), (3, 4)])
    assert r.h == pytest.approx(2.4, abs=1e-9) and r.df == 1
    r = kruskal_wallis([(5,), (5,), (5,)])
    assert (r.h, r.p_value) == (0.0, 1.0)


def test_kruskal_validation():
    for bad in ([(1, 2, 3)], [(1, 2), ()], [(1, 2), (np.nan,)], [(1,), (2,)]):
        with pytest.raises(StatsError):
            kruskal_wallis(bad)


def test_chi_square_closed_forms():
    assert chi_square_sf(0, 3) == 1
    for x in np.linspace(0, 40, 81):
        assert chi_square_sf(x, 2) == pytest.approx(math.exp(-x / 2), abs=1e-8)
    assert chi_square_sf(7.2, 2) == pytest.approx(0.027324, abs=1e-6)
    assert chi_square_sf(3.841, 1) == pytest.approx(normal_two_sided(math.sqrt(3.841)), abs=1e-10)
    assert chi_square_sf(3.841, 1) == pytest.approx(0.05, abs=1e-4)
    with pytest.raises(StatsError):
        chi_square_sf(1.0, 0)


@settings(max_examples=200)
@given(group_sets)
def test_kruskal_matches_scipy(groups):
    ours = kruskal_wallis(groups)
    pooled = [x for g in groups for x in g]
    if len(set(pooled)) == 1:
        assert ours.h == 0
        return
    ref = sps.kruskal(*groups)
    assert ours.h == pytest.approx(ref.statistic, rel=1e-9, abs=1e-12)
    assert ours.p_value == pytest.approx(ref.pvalue, rel=1e-8, abs=1e-12)


def test_rank_invariance_on_random_group_sets():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        groups = [rng.integers(0, 15, rng.integers(1, 7)).astype(float) for _ in range(rng.integers(2, 5))]
        if sum(map(len, groups)) < 3:
            groups[0] = np.append(groups[0], [1.0, 2.0])
        base = kruskal_wallis(groups).h
        shift = rng.uniform(-100, 100)
        assert kruskal_wallis([g + shift for g in groups]).h == pytest.approx(base, abs=1e-9)
        assert kruskal_wallis([rng.permutation(g) for g in groups]).h == pytest.approx(base, abs=1e-9)


def test_dunn_hand_computation():
    (row,) = pairwise_dunn([(1, 2, 3), (7, 8, 9)])
    # pooled ranks 1..6; mean ranks 2 and 5; var = 6*7/12 = 3.5
    se = math.sqrt(3.5 * (1 / 3 + 1 / 3))
    assert row.statistic == pytest.approx(-3.0) and row.std_error == pytest.approx(se)
    assert row.z == pytest.approx(-3.0 / se)
    assert row.p_value == pytest.approx(2 * sps.norm.sf(3.0 / se), rel=1e-12)
    assert row.adjusted_p == row.p_value


def test_dunn_symmetry_and_bonferroni():
    rng = np.random.default_rng(3)
    groups = {name: rng.normal(loc, 1, 8) for name, loc in zip("ABCD", (0, 0.5, 1, 3))}
    rows = pairwise_dunn(groups)
    assert len(rows) == 6
    for r in rows:
        assert r.adjusted_p == min(1.0, 6 * r.p_value)
        assert r.significant == (r.adjusted_p < 0.05)
    flipped = pairwise_dunn({"B": groups["B"], "A": groups["A"]})[0]
    straight = pairwise_dunn({"A": groups["A"], "B": groups["B"]})[0]
    assert flipped.z == pytest.approx(-straight.z) and flipped.p_value == pytest.approx(straight.p_value)


def test_dunn_tie_correction_reduces_variance():
    tied = pairwise_dunn([(1, 1, 2), (2, 3, 3)])[0]
    n = 6
    ties = 3 * (2**3 - 2)
    var = n * (n + 1) / 12 - ties / (12 * (n - 1))
    assert tied.std_error == pytest.approx(math.sqrt(var * (2 / 3)))


def test_dunn_alpha_validation():
    with pytest.raises(StatsError):
        pairwise_dunn([(1, 2), (3, 4)], alpha=1.5)


def test_compare_groups_and_rows():
    omnibus, rows = compare_groups({"NSGA2": [1, 2, 3], "NRGA": [4, 5, 6], "SPEA2": [7, 8, 9]})
    assert omnibus.h == pytest.approx(7.2)
    assert [r.as_row()[0] for r in rows] == ["NSGA2-NRGA", "NSGA2-SPEA2", "NRGA-SPEA2"]
    assert len(PairwiseRow.HEADER) == len(rows[0].as_row())


def test_group_by_skips_blanks():
    rows = [{"alg": "A", "QM": "1"}, {"alg": "A", "QM": ""}, {"alg": "B", "QM": "0.5"}, {"alg": "B", "QM": "nan"}]
    assert group_by(rows, "alg", "QM") == {"A": [1.0], "B": [0.5]}
