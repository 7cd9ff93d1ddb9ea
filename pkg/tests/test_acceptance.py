"""Acceptance suite: one test (or test family) per criterion, each recording a PASS/FAIL verdict."""

import math
import time

import numpy as np
import pytest
from conftest import TINY_N_MAX
from oracles import binary_product_is_exact, sqrt_selection_is_exact
from report import record

from greenlrip.doe import L9, L27, LEVEL_GRIDS, best_levels, is_orthogonal, snr, tune
from greenlrip.exact import (EnumerationBackend, augmented_eps_constraint, build_milp, enumerate_pareto,
                             enumerate_plans, induced_assignment)
from greenlrip.inventory import (DcInventoryState, classify, expected_inventory,
                                 expected_inventory_closed_form, safety_stock)
from greenlrip.metrics import (clip_to_reference, diversification_metric, hypervolume, mean_ideal_distance,
                               quality_metric, reference_point, spacing_metric)
from greenlrip.moea import ALGORITHMS, Problem, default_config, run
from greenlrip.stats import chi_square_sf, kruskal_wallis, pairwise_dunn

SEEDS = range(5)
FE_BUDGET = 30_000
DEMAND_MULTIPLIERS = (0.5, 0.75, 1.0, 1.25, 1.5, 2.0)


def _same_front(a: np.ndarray, b: np.ndarray, tol: float = 1e-6) -> bool:
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= tol))


# ---------------------------------------------------------------- 1

def test_criterion_1_eps_constraint_equals_enumeration(tiny_instances, tiny_fronts):
    bad, slowest = [], 0.0
    for j, (inst, exact) in enumerate(zip(tiny_instances, tiny_fronts)):
        start = time.perf_counter()
        front = augmented_eps_constraint(EnumerationBackend(inst, TINY_N_MAX), inst)
        elapsed = time.perf_counter() - start
        slowest = max(slowest, elapsed)
        if not _same_front(front.array(), exact.array()) or elapsed > 60:
            bad.append(j)
    ok = record(1, not bad, f"{20 - len(bad)}/20 instances set-equal within 1e-6, slowest {slowest:.1f}s")
    assert ok, f"mismatching instances: {bad}"


# ---------------------------------------------------------------- 2

def test_criterion_2_linearization_soundness(tiny_instances):
    plans_checked, failures = 0, []
    for j, inst in enumerate(tiny_instances):
        found = enumerate_plans(inst, TINY_N_MAX)
        model = build_milp(inst, n_max=TINY_N_MAX)
        compiled = model.compile()
        for plan, obj in zip(found.plans, found.objectives):
            x = compiled.vector(induced_assignment(model, inst, plan))
            errs = compiled.check(x)
            vals = compiled.objective_values(x)
            if errs or not np.all(np.abs(vals - obj) <= 1e-6 * np.abs(obj)):
                failures.append((j, errs[:2], vals.tolist(), obj.tolist()))
                break
            plans_checked += 1
    truth = all(binary_product_is_exact(n) for n in (2, 3, 4))
    subsets = all(sqrt_selection_is_exact(n) for n in range(1, 9))
    ok = record(2, not failures and truth and subsets,
                f"{plans_checked} plans extend to feasible model points; products n=2..4 {truth}; "
                f"subset selection |I|<=8 {subsets}")
    assert ok, failures[:3]


# ---------------------------------------------------------------- 3

@pytest.fixture(scope="module")
def moea_runs(tiny_instances, tiny_fronts):
    """All 4 x 20 x 5 runs with per-run HV ratio, recovery, wall time and evaluation count."""
    counts = []
    original = Problem.evaluate

    def counting(self, keys):
        out = original(self, keys)
        counts.append(self.evaluations)
        return out

    results = {}
    Problem.evaluate = counting
    try:
        for alg in ALGORITHMS:
            for j, (inst, exact) in enumerate(zip(tiny_instances, tiny_fronts)):
                ref = reference_point(exact)
                hv_exact = hypervolume(exact, ref)
                want = exact.array()
                for seed in SEEDS:
                    config = default_config(alg, fe_budget=FE_BUDGET, n_max=TINY_N_MAX, seed=seed)
                    counts.clear()
                    start = time.perf_counter()
                    front = run(inst, config)
                    elapsed = time.perf_counter() - start
                    got = front.array()
                    hv = hypervolume(clip_to_reference(got, ref), ref) / hv_exact
                    hits = sum(any(_same_front(p[None], q[None]) for q in got) for p in want)
                    results[alg, j, seed] = dict(hv=hv, recovery=hits / len(want), seconds=elapsed,
                                                 evaluations=max(counts), budget=FE_BUDGET + config.population_size)
    finally:
        Problem.evaluate = original
    return results


@pytest.mark.parametrize("alg", ALGORITHMS)
def test_criterion_3_moea_recovery(alg, moea_runs, tiny_instances):
    rows = {k: v for k, v in moea_runs.items() if k[0] == alg}
    hv_ok = [j for j in range(len(tiny_instances)) if sum(rows[alg, j, s]["hv"] >= 0.95 for s in SEEDS) >= 4]
    slow = max(r["seconds"] for r in rows.values())
    ok = len(hv_ok) == len(tiny_instances) and slow <= 30
    detail = f"{alg}: HV>=95% in >=4/5 seeds on {len(hv_ok)}/20 instances, slowest run {slow:.1f}s"
    if alg == "NSGA2":
        rec_ok = [j for j in range(len(tiny_instances))
                  if sum(rows[alg, j, s]["recovery"] >= 0.8 for s in SEEDS) >= 4]
        mean_rec = np.mean([r["recovery"] for r in rows.values()])
        ok = ok and len(rec_ok) == len(tiny_instances)
        detail += f", >=80% exact points in >=4/5 seeds on {len(rec_ok)}/20 (mean {mean_rec:.3f})"
    failing = sorted(set(range(len(tiny_instances))) - set(hv_ok))
    if failing:
        detail += f", failing instances {failing}"
    assert record(3, ok, detail), detail


# ---------------------------------------------------------------- 4

def test_criterion_4_metric_examples():
    checks = {
        "SM gaps (1,3)": abs(spacing_metric([(0, 4), (1, 4), (4, 4)]) - 1.0) <= 1e-9,
        "MID zero": mean_ideal_distance([(2, 3)], (2, 3), (1, 1)) == 0,
        "MID (0.6,0.8)": abs(mean_ideal_distance([(3.0, 8.0)], (0, 0), (5, 10)) - 1.0) <= 1e-9,
        "MID mean": abs(mean_ideal_distance([(1, 0), (0, 0)], (0, 0), (1, 1)) - 0.5) <= 1e-9,
        "DM=5": abs(diversification_metric([(0, 4), (3, 0)]) - 5.0) <= 1e-9,
        "QM shares": all(abs(a - b) <= 1e-9 for a, b in
                         zip(quality_metric([[(1, 3)], [(2, 2)], [(3, 3)]]), (0.5, 0.5, 0.0))),
        "HV=3": abs(hypervolume([(1, 2), (2, 1)], (3, 3)) - 3.0) <= 1e-9,
        "QM identical": all(abs(s - 1) <= 1e-9 for s in quality_metric([[(1, 4), (2, 3), (4, 1)]] * 4)),
    }
    failed = [k for k, v in checks.items() if not v]
    assert record(4, not failed, f"{len(checks) - len(failed)}/{len(checks)} metric examples"), failed


# ---------------------------------------------------------------- 5

def test_criterion_5_inventory():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100_000):
        mu, inflow, safety = rng.uniform(1, 5000), rng.uniform(1, 5000), rng.uniform(0, 500)
        n = int(rng.integers(1, 20))
        lead, z = rng.uniform(1, 10), rng.uniform(0.5, 3)
        state = DcInventoryState(mu, (safety / z) ** 2 / lead, n, inflow / n, lead, z)
        want = expected_inventory_closed_form(mu, state.inflow, state.safety)
        worst = max(worst, abs(expected_inventory(state) - want) / max(abs(want), 1e-300))

    # Boundary grid: inflow straddles the demand and the demand plus safety stock, ties included.
    grid_errors = 0
    big_m = 1e6
    for mu in (100.0, 1000.0, 4096.0):
        safety = safety_stock(64.0, 4.0, 2.0)  # = 32, exactly representable
        for inflow in (mu - 1, mu, mu + 1, mu + safety - 1, mu + safety, mu + safety + 1):
            for n in (1, 2, 4):
                t, tp = classify(mu, 64.0, n, inflow / n, 4.0, 2.0)
                gap, surplus = mu - inflow, inflow - mu - safety
                rows_hold = (big_m * t >= gap and gap >= -big_m * (1 - t)
                             and big_m * tp >= surplus and surplus >= -big_m * (1 - tp))
                strict = (t == int(gap > 0)) and (tp == int(gap <= 0 and surplus > 0))
                if not (rows_hold and strict):
                    grid_errors += 1
    ok = worst <= 1e-9 and grid_errors == 0
    assert record(5, ok, f"max relative gap {worst:.2e} over 1e5 states; {grid_errors} boundary-grid errors")


# ---------------------------------------------------------------- 6

def test_criterion_6_statistics():
    h1 = kruskal_wallis([(1, 2, 3), (4, 5, 6), (7, 8, 9)]).h
    h2 = kruskal_wallis([(1, 2), (3, 4)]).h
    chi_gap = max(abs(chi_square_sf(x, 2) - math.exp(-x / 2)) for x in np.linspace(0, 50, 501))
    rng = np.random.default_rng(6)
    rows = pairwise_dunn({k: rng.normal(loc, 1, 6) for k, loc in zip("ABCD", (0, 0.2, 1, 2))})
    bonf = len(rows) == 6 and all(r.adjusted_p == min(1.0, 6 * r.p_value) for r in rows)
    invariant = 0
    for _ in range(1000):
        groups = [rng.integers(0, 12, rng.integers(2, 7)).astype(float) for _ in range(rng.integers(2, 5))]
        base = kruskal_wallis(groups).h
        shift = rng.uniform(-1e3, 1e3)
        shuffled = [rng.permutation(g) + shift for g in groups]
        invariant += abs(kruskal_wallis(shuffled).h - base) <= 1e-9
    ok = abs(h1 - 7.2) <= 1e-9 and abs(h2 - 2.4) <= 1e-9 and chi_gap <= 1e-8 and bonf and invariant == 1000
    assert record(6, ok, f"H={h1:.12g}, H={h2:.12g}, chi2 df=2 gap {chi_gap:.1e}, Bonferroni {bonf}, "
                         f"rank invariance {invariant}/1000")


# ---------------------------------------------------------------- 7

def test_criterion_7_taguchi(tiny_instances):
    orth = is_orthogonal(L9) and is_orthogonal(L27)
    sn = (snr([1, 1, 1]), snr([10]), snr([3, 4]))
    sn_ok = all(abs(a - b) <= 1e-4 for a, b in zip(sn, (0.0, -20.0, -10.9691)))
    rng = np.random.default_rng(7)
    planted = 0
    for trial in range(50):
        array = L9 if trial % 2 else L27
        effects = rng.normal(0, 1, (array.shape[1], 3))
        top = np.sort(effects, axis=1)
        # lift each factor's best level clear of the runner-up so the optimum is unique
        effects[np.arange(array.shape[1]), np.argmax(effects, axis=1)] = top[:, -1] + 0.1
        values = effects[np.arange(array.shape[1]), array - 1].sum(axis=1)
        planted += best_levels(array, values) == (np.argmax(effects, axis=1) + 1).tolist()
    on_grid = True
    for alg in ALGORITHMS:
        result = tune(alg, tiny_instances[:1], repetitions=1, fe_budget=200, seed=1, n_max=TINY_N_MAX)
        on_grid &= all(getattr(result.config, f) in values for f, values in LEVEL_GRIDS[alg].items())
    ok = orth and sn_ok and planted == 50 and on_grid
    assert record(7, ok, f"orthogonal {orth}; S/N {tuple(round(s, 4) for s in sn)}; planted {planted}/50; "
                         f"tuned configs on grid {on_grid}")


# ---------------------------------------------------------------- 8

def test_criterion_8_determinism_and_budget(moea_runs, tiny_instances):
    over = [k for k, r in moea_runs.items() if r["evaluations"] > r["budget"]]
    mismatched = []
    for alg in ALGORITHMS:
        for j in (0, 7):
            for seed in (0, 3):
                config = default_config(alg, fe_budget=FE_BUDGET, n_max=TINY_N_MAX, seed=seed)
                a, b = run(tiny_instances[j], config), run(tiny_instances[j], config)
                if a.to_dict() != b.to_dict():
                    mismatched.append((alg, j, seed))
    e1 = enumerate_pareto(tiny_instances[3], TINY_N_MAX).to_dict()
    e2 = enumerate_pareto(tiny_instances[3], TINY_N_MAX).to_dict()
    exact_same = e1 == e2
    ok = not over and not mismatched and exact_same
    assert record(8, ok, f"{len(moea_runs) - len(over)}/{len(moea_runs)} runs within fe_budget + population; "
                         f"{16 - len(mismatched)}/16 reruns identical; exact reruns identical {exact_same}"), \
        (over[:5], mismatched)


# ---------------------------------------------------------------- 9

def test_criterion_9_demand_sweep(tiny_instances):
    violations, informative = [], 0
    for j, inst in enumerate(tiny_instances):
        mins = []
        for m in DEMAND_MULTIPLIERS:
            pts = enumerate_pareto(inst.with_demand_scale(m), TINY_N_MAX).array()
            # An infeasible scenario counts as an unbounded cost, which keeps the sequence monotone.
            mins.append(pts.min(axis=0) if len(pts) else np.array([math.inf, math.inf]))
        mins = np.array(mins)
        informative += int(np.isfinite(mins[:, 0]).sum() >= 2)
        if any(np.any(b < a - 1e-9 * np.maximum(1.0, np.abs(a))) for a, b in zip(mins, mins[1:])):
            violations.append(j)
    ok = not violations
    assert record(9, ok, f"min z1 and min z2 weakly increasing on {20 - len(violations)}/20 instances "
                         f"({informative} with >=2 feasible multipliers)"), violations
