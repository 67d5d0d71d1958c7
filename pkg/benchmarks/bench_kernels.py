"""Compare the compiled and pure-Python kernels on generated instances.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from ara_interdiction import kernels
from ara_interdiction.ara import AraConfig, build_beliefs, run_ara, uniform_levels
from ara_interdiction.defender import solve_exact, solve_greedy
from ara_interdiction.generator import GenSpec, case_study_spec, generate
from ara_interdiction.objective import DefenderObjective

CASES = {
    "case study 5x5": case_study_spec(1),
    "10x15, 24 controls": GenSpec(layers=10, nodes_per_layer=15, num_controls=24, budget=12,
                                  budget_kind="knapsack", alpha2=1.0, seed=1, out_degree=None),
}


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(name, spec, repeat):
    inst = generate(spec)
    res = run_ara(inst, AraConfig(K=10, solver="greedy"))
    beliefs = build_beliefs(uniform_levels(0, 9), res.paths, inst)
    rel = inst.reliabilities.delta[0]
    ga = inst.graph.arrays
    rows = {}
    for backend in kernels.available():
        kernels.set_backend(backend)
        obj = DefenderObjective(beliefs, inst.catalog, inst.graph, cache_size=1)
        cands = list(range(1, len(inst.catalog)))
        mask = obj.mask([0])
        rows[backend] = {
            "best_path": timed(lambda: kernels.best_path(inst.graph.node_count, ga.heads, ga.out_ptr, rel), repeat),
            "success": timed(lambda: obj.kernel.success(mask), repeat),
            "success_batch": timed(lambda: obj.kernel.success_batch(mask, obj.ctrl_ptr, obj.ctrl_edges,
                                                                    np.array(cands)), repeat),
            "greedy": timed(lambda: solve_greedy(beliefs, inst.catalog, inst.graph), repeat),
            "exact": timed(lambda: solve_exact(beliefs, inst.catalog, inst.graph), 1),
            "ara K=10": timed(lambda: run_ara(inst, AraConfig(K=10)), 1),
        }
    print(f"\n{name}: {inst.graph.edge_count} edges, {len(inst.catalog)} controls, "
          f"{len(beliefs.entries)} beliefs")
    names = list(rows)
    print(f"  {'kernel':<14}" + "".join(f"{b:>12}" for b in names) + ("     speedup" if len(names) > 1 else ""))
    for op in rows[names[0]]:
        vals = [rows[b][op] for b in names]
        line = f"  {op:<14}" + "".join(f"{v * 1e3:>10.3f}ms" for v in vals)
        if len(names) > 1:
            line += f"{rows['python'][op] / rows['cython'][op]:>11.1f}x"
        print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    before = kernels.backend()
    try:
        for name, spec in CASES.items():
            bench(name, spec, args.repeat)
    finally:
        kernels.set_backend(before)


if __name__ == "__main__":
    main()
