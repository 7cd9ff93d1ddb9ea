"""Batch experiment harness: generate, solve, exact, compare, tune, stats, sweep-demand."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import doe, stats
from .exact import (DEFAULT_DELTA, EnumerationBackend, InfeasibleInstanceError, augmented_eps_constraint, build_milp,
                    enumerate_pareto, export_lp)
from .instance import TABLE5_SIZES, dumps, generate, load, save
from .io import read_csv, write_csv, write_json, write_manifest
from .metrics import Front, MetricError, ideal_and_ranges, metric_row, quality_metric
from .moea import ALGORITHMS, RunLog, default_config, run

log = logging.getLogger("greenlrip")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_PARTIAL = 0, 2, 3, 4
DEFAULT_EXACT_TIME_LIMIT = 3 * 3600.0
DEFAULT_RUNS = 5
DEFAULT_MULTIPLIERS = (0.5, 0.75, 1.0, 1.25, 1.5, 2.0)
METRIC_COLUMNS = ("QM", "SM", "MID", "DM")


class InputError(ValueError):
    """Bad user input; maps to exit code 2."""


class InfeasibleError(RuntimeError):
    """No feasible plan was found; maps to exit code 3."""


def instance_digest(inst) -> str:
    return hashlib.sha256(dumps(inst).encode()).hexdigest()[:16]


def save_front(path: Path, front: Front, inst, **extra) -> Path:
    return write_json(path, {**front.to_dict(), "instance": instance_digest(inst), **extra})


def load_front(path: str | Path) -> tuple[Front, dict]:
    try:
        doc = json.loads(Path(path).read_text())
        return Front.from_dict(doc), doc
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"cannot read front {path}: {exc}") from exc


def _load_instance(path: str):
    try:
        return load(path)
    except OSError as exc:
        raise InputError(f"cannot read instance {path}: {exc}") from exc


def _parse_size(text: str) -> tuple[int, int, int, int]:
    try:
        parts = tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise InputError(f"size must be four integers like 2,4,3,3, got {text!r}") from exc
    if len(parts) != 4:
        raise InputError(f"size must have four entries, got {text!r}")
    return parts


def _load_config(args, algorithm: str | None = None):
    overrides = {}
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        algorithm = algorithm or doc.pop("algorithm", None)
        doc.pop("algorithm", None)
        overrides.update(doc)
    if algorithm is None:
        raise InputError("an algorithm is required (--algorithm or a config file)")
    if getattr(args, "fe_budget", None) is not None:
        overrides["fe_budget"] = args.fe_budget
    if getattr(args, "n_max", None) is not None:
        overrides["n_max"] = args.n_max
    try:
        return default_config(algorithm, **overrides)
    except TypeError as exc:
        raise InputError(f"invalid config field: {exc}") from exc


def _pool_map(fn, jobs: list, threads: int) -> list:
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


# ---------------------------------------------------------------- gen

def cmd_gen(args) -> int:
    out = Path(args.out)
    sizes = [_parse_size(s) for s in args.sizes] if args.sizes else list(TABLE5_SIZES)
    written = []
    for j, size in enumerate(sizes):
        seed = args.seed + j
        inst = generate(size, seed)
        name = f"inst_{j + 1:02d}_{'x'.join(map(str, size))}_s{seed}.json"
        written.append(save(inst, out / name))
    write_manifest(out, "gen", {"sizes": [list(s) for s in sizes], "seed": args.seed}, written)
    log.info("wrote %d instances to %s", len(written), out)
    return EXIT_OK


# ---------------------------------------------------------------- solve

def _solve_one(job):
    inst, config = job
    logger = RunLog()
    front = run(inst, config, logger)
    return front, logger.rows


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    base = _load_config(args, args.algorithm)
    if args.runs < 1:
        raise InputError("--runs must be >= 1")
    out = Path(args.out)
    configs = [base.with_(seed=args.seed + r) for r in range(args.runs)]
    results = _pool_map(_solve_one, [(inst, c) for c in configs], args.threads)
    written, empty = [], 0
    for config, (front, rows) in zip(configs, results):
        stem = f"{config.algorithm}_s{config.seed}"
        written.append(save_front(out / f"front_{stem}.json", front, inst, config=config.to_dict()))
        written.append(write_csv(out / f"log_{stem}.csv", RunLog.COLUMNS,
                                 ([r[c] for c in RunLog.COLUMNS] for r in rows)))
        empty += len(front) == 0
    write_manifest(out, "solve", {"instance": args.instance, "config": base.to_dict(), "runs": args.runs,
                                  "seed": args.seed}, written)
    if empty == len(configs):
        raise InfeasibleError("no run found a feasible plan")
    return EXIT_OK


# ---------------------------------------------------------------- exact

def cmd_exact(args) -> int:
    inst = _load_instance(args.instance)
    out = Path(args.out)
    time_limit = args.time_limit if args.time_limit is not None else DEFAULT_EXACT_TIME_LIMIT
    if args.mode == "export-lp":
        model = build_milp(inst, n_max=args.n_max)
        path = export_lp(model, out / "model.lp")
        write_manifest(out, "exact", {"instance": args.instance, "mode": args.mode, "n_max": args.n_max}, [path])
        return EXIT_OK
    if args.mode == "enumerate":
        front = enumerate_pareto(inst, args.n_max, time_limit=time_limit)
    else:
        backend = EnumerationBackend(inst, args.n_max, time_limit=time_limit)
        front = augmented_eps_constraint(backend, inst, grid_points=args.grid_points, delta=args.delta)
        front.incomplete = backend.enumeration.incomplete
    path = save_front(out / f"front_{args.mode}.json", front, inst)
    write_manifest(out, "exact", {"instance": args.instance, "mode": args.mode, "n_max": args.n_max,
                                  "time_limit": time_limit}, [path])
    if front.incomplete:
        log.warning("time limit reached; front marked incomplete")
        return EXIT_PARTIAL
    if len(front) == 0:
        raise InfeasibleError("instance has no feasible plan")
    return EXIT_OK


# ---------------------------------------------------------------- compare

def _test_label(doc: dict) -> str:
    return doc.get("test") or doc.get("instance", "")


def compare_fronts(fronts: Sequence[tuple[Front, dict]]) -> list[dict]:
    """Metric rows per stored front; QM is judged among fronts that share a seed."""
    digests = {doc.get("instance") for _, doc in fronts}
    if len(digests) > 1:
        raise InputError("fronts come from different instances")
    nonempty = [f for f, _ in fronts if len(f)]
    best, ranges = ideal_and_ranges(nonempty) if nonempty else (None, None)
    by_seed: dict = {}
    for j, (f, _) in enumerate(fronts):
        by_seed.setdefault(f.seed, []).append(j)
    qm = [None] * len(fronts)
    for idx in by_seed.values():
        if len(idx) == 1:
            qm[idx[0]] = 1.0 if len(fronts[idx[0]][0]) else 0.0
            continue
        try:
            shares = quality_metric([fronts[j][0] for j in idx])
        except MetricError:
            shares = [0.0] * len(idx)
        for j, s in zip(idx, shares):
            qm[j] = s
    rows = []
    for j, (f, _) in enumerate(fronts):
        m = metric_row(f, best, ranges) if len(f) else {"SM": None, "MID": None, "DM": None}
        rows.append({"test": _test_label(fronts[j][1]), "run": f.seed, "algorithm": f.algorithm, "QM": qm[j], **m, "points": len(f)})
    return rows


def cmd_compare(args) -> int:
    fronts = [load_front(p) for p in args.fronts]
    rows = compare_fronts(fronts)
    header = ("test", "run", "algorithm", *METRIC_COLUMNS, "points")
    path = write_csv(Path(args.out) / "metrics.csv", header, ([r[h] for h in header] for r in rows))
    write_manifest(args.out, "compare", {"fronts": list(args.fronts)}, [path])
    return EXIT_OK


# ---------------------------------------------------------------- tune

def _tuning_grid(args, algorithm: str) -> dict | None:
    if not args.grid:
        return None
    try:
        grid = json.loads(Path(args.grid).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read level grid {args.grid}: {exc}") from exc
    return grid.get(algorithm, grid) if isinstance(grid, dict) else grid


def cmd_tune(args) -> int:
    algorithm = default_config(args.algorithm).algorithm
    instances = [_load_instance(p) for p in args.instances]
    result = doe.tune(algorithm, instances, grid=_tuning_grid(args, algorithm), repetitions=args.reps,
                      fe_budget=args.fe_budget or 30_000, seed=args.seed, n_max=args.n_max,
                      snr_form=args.snr_form, threads=args.threads)
    out = Path(args.out)
    written = [
        write_csv(out / f"tuning_{algorithm}.csv", result.report_header(), result.report_rows()),
        write_json(out / f"tuned_{algorithm}.json", result.config.to_dict()),
    ]
    write_manifest(out, "tune", {"algorithm": algorithm, "instances": list(args.instances), "reps": args.reps,
                                 "seed": args.seed, "snr_form": args.snr_form,
                                 "levels": result.levels}, written)
    return EXIT_OK


# ---------------------------------------------------------------- stats

def cmd_stats(args) -> int:
    try:
        rows = read_csv(args.metrics)
    except OSError as exc:
        raise InputError(f"cannot read {args.metrics}: {exc}") from exc
    omnibus, pairwise = [], []
    for metric in METRIC_COLUMNS:
        groups = stats.group_by(rows, "algorithm", metric)
        if len(groups) < 2:
            if metric == "QM":
                raise InputError("stats needs at least 2 algorithms")
            continue
        if any(len(g) == 0 for g in groups.values()) or sum(map(len, groups.values())) < 3:
            continue
        kw, table = stats.compare_groups(groups, args.alpha)
        omnibus.append([metric, kw.h, kw.df, kw.p_value, kw.p_value < args.alpha])
        pairwise += [[metric, *r.as_row()] for r in table]
    out = Path(args.out)
    written = [
        write_csv(out / "kruskal.csv", ("metric", "H", "df", "p_value", "reject"), omnibus),
        write_csv(out / "pairwise.csv", ("metric", *stats.PairwiseRow.HEADER), pairwise),
    ]
    write_manifest(out, "stats", {"metrics": args.metrics, "alpha": args.alpha}, written)
    return EXIT_OK


# ---------------------------------------------------------------- sweep-demand

def _sweep_one(job):
    inst, method, config, n_max, time_limit = job
    if method == "enumerate":
        return enumerate_pareto(inst, n_max, time_limit=time_limit)
    return run(inst, config)


def cmd_sweep_demand(args) -> int:
    inst = _load_instance(args.instance)
    mults = args.multipliers or list(DEFAULT_MULTIPLIERS)
    if any(m <= 0 for m in mults):
        raise InputError("demand multipliers must be positive")
    method = args.method.lower()
    config = None if method == "enumerate" else _load_config(args, method).with_(seed=args.seed)
    jobs = [(inst.with_demand_scale(m), method, config, args.n_max, args.time_limit) for m in mults]
    fronts = _pool_map(_sweep_one, jobs, args.threads)
    out = Path(args.out)
    written, summary, partial = [], [], False
    for m, job, front in zip(mults, jobs, fronts):
        written.append(save_front(out / f"front_demand_{m:g}.json", front, job[0], multiplier=m))
        pts = front.array()
        summary.append([m, len(front), *(pts.min(axis=0).tolist() if len(pts) else [None, None])])
        partial |= front.incomplete
    written.append(write_csv(out / "sweep.csv", ("multiplier", "points", "min_z1", "min_z2"), summary))
    write_manifest(out, "sweep-demand", {"instance": args.instance, "multipliers": mults, "method": method,
                                         "seed": args.seed}, written)
    if partial:
        return EXIT_PARTIAL
    if all(len(f) == 0 for f in fronts):
        raise InfeasibleError("no scenario has a feasible plan")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base random seed")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker processes for independent runs")
    common.add_argument("--time-limit", type=float, default=None, help="wall-clock limit in seconds (exact modes)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="greenlrip", parents=[common], description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate instances")
    g.add_argument("--sizes", action="append", help="K,I,Vin,Vout (repeatable); default is the 12-size suite")

    s = sub.add_parser("solve", parents=[common], help="seeded evolutionary runs")
    s.add_argument("instance")
    s.add_argument("--algorithm", type=str.upper, choices=[a.upper() for a in ALGORITHMS] +
                   ["NSGA-II", "SPEA-II", "PESA-II"], default=None)
    s.add_argument("--config", help="JSON config (e.g. written by tune)")
    s.add_argument("--runs", type=int, default=DEFAULT_RUNS)
    s.add_argument("--fe-budget", type=int, default=None)
    s.add_argument("--n-max", type=int, default=None)

    e = sub.add_parser("exact", parents=[common], help="exact front or LP export")
    e.add_argument("instance")
    e.add_argument("--mode", choices=("enumerate", "epsc", "export-lp"), default="epsc")
    e.add_argument("--n-max", type=int, default=None)
    e.add_argument("--grid-points", type=int, default=10)
    e.add_argument("--delta", type=float, default=DEFAULT_DELTA)

    c = sub.add_parser("compare", parents=[common], help="metrics table from front files")
    c.add_argument("fronts", nargs="+")

    t = sub.add_parser("tune", parents=[common], help="Taguchi tuning")
    t.add_argument("--algorithm", required=True)
    t.add_argument("--instances", nargs="+", required=True)
    t.add_argument("--grid", help="JSON level grid: {factor: [low, mid, high]}")
    t.add_argument("--reps", type=int, default=doe.DEFAULT_REPETITIONS)
    t.add_argument("--fe-budget", type=int, default=None)
    t.add_argument("--n-max", type=int, default=None)
    t.add_argument("--snr-form", choices=doe.SNR_FORMS, default="smaller")

    st = sub.add_parser("stats", parents=[common], help="Kruskal-Wallis and Dunn tests on a metrics CSV")
    st.add_argument("metrics")
    st.add_argument("--alpha", type=float, default=stats.DEFAULT_ALPHA)

    d = sub.add_parser("sweep-demand", parents=[common], help="re-solve under scaled demand")
    d.add_argument("instance")
    d.add_argument("--multipliers", type=float, nargs="+")
    d.add_argument("--method", default="enumerate", help="enumerate or an algorithm name")
    d.add_argument("--config")
    d.add_argument("--fe-budget", type=int, default=None)
    d.add_argument("--n-max", type=int, default=None)
    return p


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "exact": cmd_exact, "compare": cmd_compare, "tune": cmd_tune,
            "stats": cmd_stats, "sweep-demand": cmd_sweep_demand}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except (InfeasibleError, InfeasibleInstanceError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        # every input-validation error in the package derives from ValueError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
