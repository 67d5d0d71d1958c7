"""Replication studies over seeded synthetic instances.

Every study writes one CSV with a header row, one ``rep`` row per replication
(and per curve point), and ``mean``/``se`` aggregate rows that can be
recomputed from the ``rep`` rows. Floats are written with ``repr`` so the
output is exact and locale independent. Anything timing related goes to a
separate ``*_timing.csv`` so that the main file is byte-identical across runs.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .ara import (
    AraConfig,
    actual_attack_success,
    attacker_response,
    build_beliefs,
    run_ara,
    run_offset_experiment,
    uniform_levels,
)
from .defender import SearchLimitExceeded, solve_exact, solve_greedy
from .generator import TABLE4_GRID, GenSpec, case_study_spec, generate, grid_out_degree
from .io import example_instance
from .objective import DefenderObjective

EXPERIMENTS = ("table2_example", "fig3_curves", "fig4_subsets", "fig5_offsets", "table4_gaps")
FIG4_SUBSETS = (("0-4", 0, 4), ("5-9", 5, 9), ("0-9", 0, 9))


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    replications: int = 100
    base: GenSpec = field(default_factory=case_study_spec)
    seed: int = 0
    K: int = 10
    solver: str = "exact"
    offsets: tuple[int, ...] = tuple(range(-9, 10))
    grid: tuple[tuple[int, int, int, int, int], ...] = TABLE4_GRID
    max_layers: int | None = 15
    table4_alpha: float = 0.15
    table4_alpha2: float = 1.0
    node_limit: int = 10**7
    workers: int = 1

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.K < 1:
            raise ValueError("K must be >= 1")


def replication_seed(seed: int, rep: int) -> int:
    """64-bit instance seed for replication ``rep`` of a study seeded with ``seed``."""
    return int(np.random.SeedSequence([seed, rep]).generate_state(1, np.uint64)[0])


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return str(x)


def to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


def mean_se(values: Sequence[float]) -> tuple[float, float]:
    vals = [v for v in values if not (isinstance(v, float) and math.isnan(v))]
    if not vals:
        return math.nan, math.nan
    m = math.fsum(vals) / len(vals)
    if len(vals) < 2:
        return m, 0.0
    return m, statistics.stdev(vals) / math.sqrt(len(vals))


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class ExperimentOutput:
    name: str
    header: tuple[str, ...]
    rows: list[tuple]
    timing_header: tuple[str, ...] | None = None
    timing_rows: list[tuple] | None = None

    @property
    def csv(self) -> str:
        return to_csv(self.header, self.rows)

    def write(self, out_dir: str | Path) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        main = out_dir / f"{self.name}.csv"
        main.write_text(self.csv, encoding="utf-8")
        written = [main]
        if self.timing_rows is not None:
            t = out_dir / f"{self.name}_timing.csv"
            t.write_text(to_csv(self.timing_header, self.timing_rows), encoding="utf-8")
            written.append(t)
        return written

    def column(self, name: str, row_type: str = "rep") -> list:
        k = self.header.index(name)
        return [r[k] for r in self.rows if r[0] == row_type]


def _aggregate(rep_rows: list[tuple], key_cols: Sequence[int], value_cols: Sequence[int],
               width: int) -> list[tuple]:
    """Mean and standard-error rows grouped by ``key_cols`` (first-seen order)."""
    groups: dict[tuple, list[tuple]] = {}
    for r in rep_rows:
        groups.setdefault(tuple(r[k] for k in key_cols), []).append(r)
    out = []
    for kind in ("mean", "se"):
        for key, rows in groups.items():
            row: list = [kind, ""] + [""] * (width - 2)
            for k, v in zip(key_cols, key):
                row[k] = v
            for c in value_cols:
                m, se = mean_se([r[c] for r in rows])
                row[c] = m if kind == "mean" else se
            out.append(tuple(row))
    return out


# -- worked example ---------------------------------------------------------

def table2_example(spec: ExperimentSpec) -> ExperimentOutput:
    inst = example_instance()
    K = 4
    res = run_ara(inst, AraConfig(K=K, solver=spec.solver, seed=spec.seed))
    g = inst.graph
    header = ("level", "attacker", "attacker_path", "attacker_success",
              "defender_portfolio", "defender_success")
    rows = []
    for k in range(K + 1):
        for a in inst.population.attackers:
            path = res.paths.get(k, {}).get(a) if k < K else None
            rows.append((
                k, a,
                ">".join(g.label(v) for v in path.nodes) if path else "",
                path.reliability if path else math.nan,
                " ".join(res.portfolio(k)),
                res.defenders[k].believed_success,
            ))
    return ExperimentOutput("table2_example", header, rows)


# -- level curves -----------------------------------------------------------

def _ara_rep(args: tuple[ExperimentSpec, int]):
    spec, rep = args
    inst = generate(spec.base.with_seed(replication_seed(spec.seed, rep)))
    cfg = AraConfig(K=spec.K, solver=spec.solver, seed=spec.seed, node_limit=spec.node_limit)
    return inst, run_ara(inst, cfg)


def _fig3_rep(args) -> list[tuple]:
    spec, rep = args
    _, res = _ara_rep(args)
    return [("rep", rep, k, b, a) for k, b, a in res.curves()]


def fig3_curves(spec: ExperimentSpec) -> ExperimentOutput:
    header = ("row_type", "replication", "defender_level", "believed_success", "actual_success")
    reps = _map(_fig3_rep, [(spec, r) for r in range(spec.replications)], spec.workers)
    rows = [row for rr in reps for row in rr]
    rows += _aggregate(rows, key_cols=(2,), value_cols=(3, 4), width=len(header))
    return ExperimentOutput("fig3_curves", header, rows)


def _fig4_rep(args) -> list[tuple]:
    spec, rep = args
    inst, res = _ara_rep(args)
    out = []
    for name, lo, hi in FIG4_SUBSETS:
        if hi > spec.K - 1:
            continue
        levels = uniform_levels(lo, hi)
        for d in res.defenders:
            s = actual_attack_success(d.portfolio, levels, res.paths, inst.reliabilities,
                                      inst.catalog, inst.graph, inst.population)
            out.append(("rep", rep, d.level, name, s))
    return out


def fig4_subsets(spec: ExperimentSpec) -> ExperimentOutput:
    header = ("row_type", "replication", "defender_level", "attacker_levels", "actual_success")
    reps = _map(_fig4_rep, [(spec, r) for r in range(spec.replications)], spec.workers)
    rows = [row for rr in reps for row in rr]
    rows += _aggregate(rows, key_cols=(2, 3), value_cols=(4,), width=len(header))
    return ExperimentOutput("fig4_subsets", header, rows)


# -- level offsets ----------------------------------------------------------

def _fig5_rep(args) -> list[tuple]:
    spec, rep = args
    inst, res = _ara_rep(args)
    offsets = [o for o in spec.offsets if abs(o) <= spec.K - 1]
    table = run_offset_experiment(inst, res.config, offsets, base=res)
    return [("rep", rep, r.offset, min(r.perceived_levels), max(r.perceived_levels),
             r.believed_success, r.actual_success) for r in table]


def fig5_offsets(spec: ExperimentSpec) -> ExperimentOutput:
    header = ("row_type", "replication", "offset", "perceived_min", "perceived_max",
              "believed_success", "actual_success")
    reps = _map(_fig5_rep, [(spec, r) for r in range(spec.replications)], spec.workers)
    rows = [row for rr in reps for row in rr]
    rows += _aggregate(rows, key_cols=(2, 3, 4), value_cols=(5, 6), width=len(header))
    return ExperimentOutput("fig5_offsets", header, rows)


def sign_test_underestimation(rows: Sequence[tuple], d: int) -> tuple[int, int, float]:
    """One-sided exact sign test that offset ``-d`` does worse than ``+d``.

    Uses ``rep`` rows of :func:`fig5_offsets`. Returns (wins for -d being
    worse, non-tied pairs, p-value). Ties are dropped.
    """
    by: dict[tuple[int, int], float] = {}
    for r in rows:
        if r[0] == "rep":
            by[(r[1], r[2])] = r[6]
    wins = n = 0
    for (rep, off), v in by.items():
        if off != -d or (rep, d) not in by:
            continue
        other = by[(rep, d)]
        if v != other:
            n += 1
            wins += v > other
    p = sum(math.comb(n, k) for k in range(wins, n + 1)) / 2**n if n else 1.0
    return wins, n, p


# -- greedy gap -------------------------------------------------------------

def table4_spec(spec: ExperimentSpec, row: tuple[int, int, int, int, int], rep: int) -> GenSpec:
    layers, nodes, edges, controls, budget = row
    return GenSpec(
        layers=layers, nodes_per_layer=nodes, num_controls=controls, budget=budget,
        budget_kind="knapsack", alpha=spec.table4_alpha, alpha2=spec.table4_alpha2,
        seed=replication_seed(spec.seed, 1000 * rep + spec.grid.index(row)),
        out_degree=grid_out_degree(layers, nodes, edges),
    )


def _table4_rep(args) -> tuple[tuple, tuple]:
    spec, row, rep = args
    layers, nodes, _, controls, budget = row
    inst = generate(table4_spec(spec, row, rep))
    K = spec.K
    # Levels 1..K-1 with greedy, then compare both methods on the level-K beliefs.
    res = run_ara(inst, AraConfig(K=max(K - 1, 1), solver="greedy", seed=spec.seed))
    paths = dict(res.paths)
    if K > 1:
        paths[K - 1] = {a: attacker_response(inst, res.portfolio(K - 1), a)
                        for a in inst.population.attackers}
    beliefs = build_beliefs(uniform_levels(0, K - 1), paths, inst)
    obj = DefenderObjective(beliefs, inst.catalog, inst.graph)
    t0 = time.perf_counter()
    greedy = solve_greedy(beliefs, inst.catalog, inst.graph, objective=obj)
    t_greedy = time.perf_counter() - t0
    obj_exact = DefenderObjective(beliefs, inst.catalog, inst.graph)
    t0 = time.perf_counter()
    try:
        exact = solve_exact(beliefs, inst.catalog, inst.graph, node_limit=spec.node_limit,
                            objective=obj_exact)
        status = "ok"
    except SearchLimitExceeded:
        exact, status = None, "guard"
    t_exact = time.perf_counter() - t0
    ratio = greedy.value / exact.value if exact is not None and exact.value > 0 else math.nan
    main = ("rep", rep, layers, nodes, inst.graph.edge_count, controls, budget,
            exact.value if exact else math.nan, greedy.value, ratio,
            exact.nodes_explored if exact else "", exact.candidates_evaluated if exact else "",
            greedy.candidates_evaluated, status)
    timing = (rep, layers, nodes, inst.graph.edge_count, controls, budget, t_exact, t_greedy)
    return main, timing


def table4_gaps(spec: ExperimentSpec) -> ExperimentOutput:
    header = ("row_type", "replication", "layers", "nodes_per_layer", "edges", "controls",
              "budget", "exact_value", "greedy_value", "ratio", "exact_nodes",
              "exact_evaluations", "greedy_evaluations", "status")
    grid = [g for g in spec.grid if spec.max_layers is None or g[0] <= spec.max_layers]
    jobs = [(spec, row, rep) for rep in range(spec.replications) for row in grid]
    results = _map(_table4_rep, jobs, spec.workers)
    rows = [m for m, _ in results]
    ratios = [r[9] for r in rows if r[-1] == "ok"]
    agg = []
    width = len(header)
    for kind, fn in (("mean", lambda v: mean_se(v)[0]), ("se", lambda v: mean_se(v)[1]),
                     ("min", min), ("median", statistics.median)):
        row = [kind] + [""] * (width - 1)
        row[9] = fn(ratios) if ratios else math.nan
        row[-1] = f"n={len(ratios)}"
        agg.append(tuple(row))
    timing_header = ("replication", "layers", "nodes_per_layer", "edges", "controls", "budget",
                     "exact_seconds", "greedy_seconds")
    return ExperimentOutput("table4_gaps", header, rows + agg, timing_header,
                            [t for _, t in results])


DRIVERS: dict[str, Callable[[ExperimentSpec], ExperimentOutput]] = {
    "table2_example": table2_example,
    "fig3_curves": fig3_curves,
    "fig4_subsets": fig4_subsets,
    "fig5_offsets": fig5_offsets,
    "table4_gaps": table4_gaps,
}


def run_experiment(spec: ExperimentSpec) -> ExperimentOutput:
    return DRIVERS[spec.experiment](spec)
