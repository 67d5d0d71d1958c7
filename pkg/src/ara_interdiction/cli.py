"""Command-line front end.

Exit codes: 0 success, 1 unexpected error, 2 usage error, 3 I/O error,
4 invalid instance or arguments, 5 solver guard exceeded. Every failure prints
one JSON line ``{"error": ..., "message": ...}`` to stderr and writes no files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .ara import AraConfig, attacker_response, build_beliefs, run_ara, uniform_levels
from .attacker import NoPathError, PathCountExceeded, level0_path
from .defender import SearchLimitExceeded, solve
from .experiments import EXPERIMENTS, ExperimentSpec, run_experiment, to_csv
from .generator import GenSpec, generate
from .graph import InstanceError, UnknownControlError
from .io import dumps_instance, example_instance, load_instance
from .objective import attack_success

EXIT_OTHER, EXIT_USAGE, EXIT_IO, EXIT_INVALID, EXIT_GUARD = 1, 2, 3, 4, 5
EXAMPLE = "@example"


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind = code, kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail(EXIT_USAGE, "usage", message)


def _fail(code: int, kind: str, message: str):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    sys.exit(code)


def _clean(x):
    """JSON-safe copy: NaN becomes null, tuples become lists."""
    if isinstance(x, float) and math.isnan(x):
        return None
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _emit(args, payload: dict, rows: tuple[tuple, list] | None = None) -> None:
    """Write a result as JSON, or as CSV when ``--format csv`` and rows exist."""
    if args.format == "csv" and rows is not None:
        text = to_csv(*rows)
    else:
        text = json.dumps(_clean(payload), indent=2) + "\n"
    if args.out:
        _write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)


def _instance(path: str):
    if path == EXAMPLE:
        return example_instance()
    return load_instance(path)


def _portfolio(raw: str | None) -> list[str]:
    if not raw:
        return []
    return [p for p in raw.replace(",", " ").split() if p]


def _path_dict(inst, path) -> dict:
    g = inst.graph
    return {"nodes": list(path.nodes), "labels": [g.label(v) for v in path.nodes],
            "reliability": path.reliability}


# -- commands ----------------------------------------------------------------

def cmd_gen(args) -> None:
    spec = GenSpec(
        layers=args.layers, nodes_per_layer=args.nodes, num_controls=args.controls,
        budget=args.budget, budget_kind=args.budget_kind, alpha=args.alpha,
        alpha2=args.alpha2, seed=args.seed, attacker_types=args.attackers,
        shared_reliabilities=args.shared, out_degree=None if args.complete else args.out_degree,
    )
    text = dumps_instance(generate(spec))
    if args.out:
        _write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)


def _ara_prefix(inst, level: int, args):
    """ARA run with K = level; its paths cover attacker levels 0..level-1."""
    return run_ara(inst, AraConfig(K=level, solver=args.method, seed=args.seed,
                                   node_limit=args.node_limit))


def cmd_solve_att(args) -> None:
    inst = _instance(args.instance)
    portfolio = inst.catalog.canonical(_portfolio(args.portfolio))
    attackers = [args.attacker] if args.attacker else list(inst.population.attackers)
    out = {}
    for a in attackers:
        inst.reliabilities.row(a)
        if args.level == 0:
            path = level0_path(inst.graph, inst.reliabilities, a,
                               [args.seed, 0, inst.population.attackers.index(a)])
        else:
            path = attacker_response(inst, portfolio, a)
        out[a] = _path_dict(inst, path)
    rows = (("attacker", "path", "reliability"),
            [(a, ">".join(map(str, d["nodes"])), d["reliability"]) for a, d in out.items()])
    _emit(args, {"level": args.level, "portfolio": list(portfolio), "paths": out}, rows)


def cmd_solve_def(args) -> None:
    inst = _instance(args.instance)
    if args.level < 1:
        raise CliError(EXIT_INVALID, "invalid", "--level must be >= 1")
    res = _ara_prefix(inst, args.level, args)
    beliefs = build_beliefs(uniform_levels(0, args.level - 1), res.paths, inst)
    kwargs = {}
    if args.method == "exact":
        kwargs["node_limit"] = args.node_limit
    rep = solve(args.method, beliefs, inst.catalog, inst.graph, **kwargs)
    d = rep.as_dict()
    d["level"] = args.level
    rows = (tuple(d), [tuple(" ".join(v) if isinstance(v, list) else v for v in d.values())])
    _emit(args, d, rows)


def cmd_solve_eval(args) -> None:
    inst = _instance(args.instance)
    if args.level < 1:
        raise CliError(EXIT_INVALID, "invalid", "--level must be >= 1")
    res = _ara_prefix(inst, args.level, args)
    beliefs = build_beliefs(uniform_levels(0, args.level - 1), res.paths, inst)
    pv = attack_success(_portfolio(args.portfolio), beliefs, inst.catalog, inst.graph)
    d = {"level": args.level, "portfolio": list(pv.portfolio),
         "cost": inst.catalog.cost_of(pv.portfolio), "attack_success": pv.attack_success,
         "prevented": pv.prevented}
    rows = (tuple(d), [tuple(" ".join(v) if isinstance(v, list) else v for v in d.values())])
    _emit(args, d, rows)


def cmd_ara(args) -> None:
    inst = _instance(args.instance)
    cfg = AraConfig(K=args.K, offset=args.offset, solver=args.solver, seed=args.seed,
                    node_limit=args.node_limit)
    res = run_ara(inst, cfg)
    curve_rows = (("defender_level", "believed_success", "actual_success"), res.curves())
    payload = {
        "K": cfg.K, "solver": cfg.solver, "offset": cfg.offset,
        "defenders": [
            {"level": d.level, "portfolio": list(d.portfolio),
             "believed_success": d.believed_success,
             "believed_levels": d.believed_levels,
             "actual_success": res.actual_curve[d.level]}
            for d in res.defenders
        ],
        "paths": {lv: {a: _path_dict(inst, p) for a, p in ps.items()}
                  for lv, ps in sorted(res.paths.items())},
    }
    csv_text = to_csv(*curve_rows) if args.emit_csv else None
    _emit(args, payload, curve_rows)
    if csv_text is not None:
        _write_atomic(Path(args.emit_csv), csv_text)


def cmd_experiment(args) -> None:
    base = GenSpec(
        layers=args.layers, nodes_per_layer=args.nodes, num_controls=args.controls,
        budget=args.budget, budget_kind=args.budget_kind, alpha=args.alpha,
        alpha2=args.alpha2, seed=0,
    )
    spec = ExperimentSpec(
        experiment=args.name, replications=args.replications, base=base, seed=args.seed,
        K=args.K, solver=args.solver, max_layers=None if args.max_layers == 0 else args.max_layers,
        node_limit=args.node_limit, workers=args.workers,
    )
    out = run_experiment(spec)
    out_dir = Path(args.out or "results")
    if args.format == "json":
        records = [dict(zip(out.header, r)) for r in out.rows]
        _write_atomic(out_dir / f"{out.name}.json", json.dumps(_clean(records), indent=1) + "\n")
        written = [out_dir / f"{out.name}.json"]
    else:
        written = out.write(out_dir)
    sys.stdout.write(json.dumps({"experiment": out.name, "rows": len(out.rows),
                                 "files": [str(p) for p in written]}) + "\n")


# -- parser ------------------------------------------------------------------

def _gen_flags(p: argparse.ArgumentParser, defaults: GenSpec | None = None) -> None:
    d = defaults
    req = d is None
    p.add_argument("--layers", type=int, required=req, default=d.layers if d else None)
    p.add_argument("--nodes", type=int, required=req, default=d.nodes_per_layer if d else None,
                   help="nodes per layer")
    p.add_argument("--controls", type=int, required=req, default=d.num_controls if d else None)
    p.add_argument("--budget", type=float, required=req, default=d.budget if d else None)
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--cardinality", dest="budget_kind", action="store_const",
                      const="cardinality", help="unit costs (default)")
    kind.add_argument("--knapsack", dest="budget_kind", action="store_const", const="knapsack",
                      help="costs U[0.5, 1.5]")
    p.set_defaults(budget_kind="cardinality")
    p.add_argument("--alpha", type=float, default=0.15, help="edge coverage probability")
    p.add_argument("--alpha2", type=float, default=0.0, help="cost sensitivity of coverage")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (directory for experiment)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--node-limit", type=int, default=10**7,
                        help="branch-and-bound node guard")

    parser = _Parser(prog="ara-interdiction", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="generate a layered instance")
    _gen_flags(g)
    g.add_argument("--attackers", type=int, default=1, help="number of attacker types")
    g.add_argument("--shared", action="store_true", help="share reliabilities across types")
    deg = g.add_mutually_exclusive_group()
    deg.add_argument("--out-degree", type=int, default=3)
    deg.add_argument("--complete", action="store_true", help="connect consecutive layers fully")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="single attacker or defender problems")
    ssub = s.add_subparsers(dest="problem", required=True, parser_class=_Parser)
    help_inst = f"instance JSON file, or {EXAMPLE} for the bundled worked example"

    att = ssub.add_parser("att", parents=[common], help="attacker best path")
    att.add_argument("instance", help=help_inst)
    att.add_argument("--portfolio", default="", help="comma separated control ids")
    att.add_argument("--level", type=int, default=1, help="0 for the myopic attacker")
    att.add_argument("--attacker", help="attacker type (default: all)")
    att.set_defaults(func=cmd_solve_att, method="exact")

    for name, fn, hlp in (("def", cmd_solve_def, "defender portfolio"),
                          ("eval", cmd_solve_eval, "evaluate a portfolio")):
        sp = ssub.add_parser(name, parents=[common], help=hlp)
        sp.add_argument("instance", help=help_inst)
        sp.add_argument("--level", type=int, default=4,
                        help="defender level k; beliefs are uniform over attacker levels 0..k-1")
        sp.add_argument("--method", choices=("exact", "greedy", "partial-enum"), default="exact")
        if name == "eval":
            sp.add_argument("--portfolio", default="", help="comma separated control ids")
        sp.set_defaults(func=fn)

    a = sub.add_parser("ara", parents=[common], help="run the level-k loop")
    a.add_argument("instance", help=help_inst)
    a.add_argument("--K", "-K", type=int, default=10)
    a.add_argument("--solver", choices=("exact", "greedy", "partial-enum"), default="exact")
    a.add_argument("--offset", type=int, default=0)
    a.add_argument("--emit-csv", metavar="FILE", help="write the believed/actual curves")
    a.set_defaults(func=cmd_ara)

    e = sub.add_parser("experiment", parents=[common], help="replication studies")
    e.add_argument("name", choices=EXPERIMENTS)
    e.add_argument("--replications", type=int, default=100)
    e.add_argument("--K", "-K", type=int, default=10)
    e.add_argument("--solver", choices=("exact", "greedy", "partial-enum"), default="exact")
    e.add_argument("--max-layers", type=int, default=15,
                   help="table4 only: skip grid rows with more layers (0 keeps all)")
    _gen_flags(e, GenSpec(layers=5, nodes_per_layer=5, num_controls=10, budget=4))
    e.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        _fail(exc.code, exc.kind, str(exc))
    except (SearchLimitExceeded, PathCountExceeded) as exc:
        _fail(EXIT_GUARD, "guard", str(exc))
    except UnknownControlError as exc:
        _fail(EXIT_INVALID, "invalid", f"unknown control {exc.args[0] if exc.args else ''}")
    except (InstanceError, NoPathError, ValueError) as exc:
        _fail(EXIT_INVALID, "invalid", str(exc))
    except OSError as exc:
        _fail(EXIT_IO, "io", f"{exc.strerror or exc}: {exc.filename or ''}".rstrip(": "))
    except Exception as exc:  # noqa: BLE001
        _fail(EXIT_OTHER, type(exc).__name__, str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
