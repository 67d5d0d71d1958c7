"""Budget-constrained portfolio selection for the defender.

All three methods maximise the prevented probability ``f`` (equivalently,
minimise believed attack success) over control subsets whose total cost fits
the budget. Among equal-valued portfolios the one with fewer controls wins,
then the one whose catalog-ordered index tuple is lexicographically smallest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .graph import AttackGraph, ControlCatalog
from .objective import DefenderBeliefs, DefenderObjective

COST_TOL = 1e-12
PRUNE_TOL = 1e-12

GUARANTEES = {
    "exact": 1.0,
    "greedy": 1.0 - 1.0 / math.sqrt(math.e),
    "partial_enum": 1.0 - 1.0 / math.e,
}


class SearchLimitExceeded(RuntimeError):
    """The exact search or enumeration would exceed its configured guard."""


@dataclass(frozen=True)
class SolveReport:
    portfolio: tuple[str, ...]
    value: float
    method: str
    nodes_explored: int
    candidates_evaluated: int
    guarantee: float
    cost: float = 0.0
    attack_success: float = 0.0

    def as_dict(self) -> dict:
        return {
            "portfolio": list(self.portfolio),
            "value": self.value,
            "attack_success": self.attack_success,
            "method": self.method,
            "nodes_explored": self.nodes_explored,
            "candidates_evaluated": self.candidates_evaluated,
            "guarantee": self.guarantee,
            "cost": self.cost,
        }


def _better(s1: float, set1: tuple[int, ...], s2: float, set2: tuple[int, ...]) -> bool:
    """True if (success s1, set1) ranks ahead of (s2, set2)."""
    if s1 != s2:
        return s1 < s2
    return (len(set1), set1) < (len(set2), set2)


def _report(obj: DefenderObjective, chosen: Sequence[int], s: float, method: str,
            nodes: int, evals: int) -> SolveReport:
    chosen = tuple(sorted(chosen))
    return SolveReport(
        obj.ids(chosen), 1.0 - s, method, nodes, evals, GUARANTEES[method],
        float(sum(obj.costs[i] for i in chosen)), s,
    )


def greedy_complete(obj: DefenderObjective, start: Sequence[int]) -> tuple[tuple[int, ...], float]:
    """Extend ``start`` by best gain-per-cost until nothing affordable helps.

    Ties in the ratio go to the lowest catalog index.
    """
    chosen = sorted(start)
    spent = float(sum(obj.costs[i] for i in chosen))
    s_cur = obj.success(chosen)
    n = len(obj.costs)
    while True:
        taken = set(chosen)
        cands = [m for m in range(n)
                 if m not in taken and obj.costs[m] <= obj.budget - spent + COST_TOL]
        if not cands:
            break
        new_s = obj.success_with_each(chosen, cands)
        ratios = (s_cur - new_s) / obj.costs[cands]
        k = int(np.argmax(ratios))
        if not ratios[k] > 0.0:
            break
        m = cands[k]
        chosen = sorted(chosen + [m])
        spent += obj.costs[m]
        s_cur = float(new_s[k])
    return tuple(chosen), s_cur


def _best_single(obj: DefenderObjective) -> tuple[tuple[int, ...], float]:
    best: tuple[tuple[int, ...], float] = ((), obj.success([]))
    cands = [m for m in range(len(obj.costs)) if obj.costs[m] <= obj.budget + COST_TOL]
    if cands:
        vals = obj.success_with_each([], cands)
        for m, s in zip(cands, vals.tolist()):
            if _better(s, (m,), best[1], best[0]):
                best = ((m,), s)
    return best


def solve_greedy(beliefs: DefenderBeliefs, cat: ControlCatalog, graph: AttackGraph,
                 objective: DefenderObjective | None = None) -> SolveReport:
    """Cost-ratio greedy compared against the best affordable single control."""
    obj = objective or DefenderObjective(beliefs, cat, graph)
    ev0 = obj.evaluations
    g_set, g_s = greedy_complete(obj, [])
    one_set, one_s = _best_single(obj)
    if one_s < g_s:
        g_set, g_s = one_set, one_s
    return _report(obj, g_set, g_s, "greedy", 0, obj.evaluations - ev0)


def solve_partial_enum(beliefs: DefenderBeliefs, cat: ControlCatalog, graph: AttackGraph,
                       max_triples: int = 10**6,
                       objective: DefenderObjective | None = None) -> SolveReport:
    """Best subset of size <= 2, or greedy completion of some affordable triple."""
    obj = objective or DefenderObjective(beliefs, cat, graph)
    n = len(obj.costs)
    if math.comb(n, 3) > max_triples:
        raise SearchLimitExceeded(f"{math.comb(n, 3)} triples exceeds guard {max_triples}")
    ev0 = obj.evaluations
    budget = obj.budget + COST_TOL
    best_set: tuple[int, ...] = ()
    best_s = obj.success([])
    nodes = 1
    for size in (1, 2):
        for sub in combinations(range(n), size):
            if sum(obj.costs[i] for i in sub) <= budget:
                nodes += 1
                s = obj.success(sub)
                if _better(s, sub, best_s, best_set):
                    best_set, best_s = sub, s
    for sub in combinations(range(n), 3):
        if sum(obj.costs[i] for i in sub) <= budget:
            nodes += 1
            done, s = greedy_complete(obj, sub)
            if _better(s, done, best_s, best_set):
                best_set, best_s = done, s
    return _report(obj, best_set, best_s, "partial_enum", nodes, obj.evaluations - ev0)


def solve_exact(beliefs: DefenderBeliefs, cat: ControlCatalog, graph: AttackGraph,
                node_limit: int = 10**7,
                objective: DefenderObjective | None = None) -> SolveReport:
    """Depth-first branch-and-bound over include/exclude decisions.

    Controls are branched in decreasing single-control gain. A node's bound on
    the best reachable success is the larger of (a) success with every
    remaining affordable control added, valid by monotonicity, and (b) current
    success minus a fractional-knapsack fill of the remaining controls'
    marginal gains at the node, valid by submodularity. The greedy portfolio
    seeds the incumbent.
    """
    obj = objective or DefenderObjective(beliefs, cat, graph)
    ev0 = obj.evaluations
    budget = obj.budget
    s_empty = obj.success([])

    affordable = [m for m in range(len(obj.costs)) if obj.costs[m] <= budget + COST_TOL]
    singles = obj.success_with_each([], affordable) if affordable else np.empty(0)
    # Zero single-control gain implies zero gain against any superset (submodularity).
    useful = [(s_empty - s, m) for m, s in zip(affordable, singles.tolist()) if s < s_empty]
    order = [m for _, m in sorted(useful, key=lambda t: (-t[0], t[1]))]

    inc_set, inc_s = greedy_complete(obj, [])
    one_set, one_s = _best_single(obj)
    if _better(one_s, one_set, inc_s, inc_set):
        inc_set, inc_s = one_set, one_s
    if _better(s_empty, (), inc_s, inc_set):
        inc_set, inc_s = (), s_empty

    nodes = 0
    best = [inc_set, inc_s]

    def visit(pos: int, chosen: list[int], s_cur: float, left: float,
              child_s: dict[int, float] | None) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise SearchLimitExceeded(f"branch-and-bound exceeded {node_limit} nodes")
        cur = tuple(sorted(chosen))
        if _better(s_cur, cur, best[1], best[0]):
            best[0], best[1] = cur, s_cur
        rest = [m for m in order[pos:] if obj.costs[m] <= left + COST_TOL]
        if not rest:
            return
        if child_s is None:
            vals = obj.success_with_each(cur, rest)
            child_s = dict(zip(rest, vals.tolist()))
        gains = {m: max(s_cur - child_s[m], 0.0) for m in rest}
        # Fractional knapsack over marginal gains.
        ranked = sorted(rest, key=lambda m: (-gains[m] / obj.costs[m], m))
        cap, relief = left, 0.0
        for m in ranked:
            if obj.costs[m] <= cap:
                relief += gains[m]
                cap -= obj.costs[m]
            else:
                relief += gains[m] * cap / obj.costs[m]
                break
        if s_cur - relief > best[1] + PRUNE_TOL:
            return
        if len(rest) > 1 and obj.success(list(cur) + rest) > best[1] + PRUNE_TOL:
            return
        m = rest[0]
        nxt = order.index(m) + 1
        visit(nxt, chosen + [m], child_s[m], left - obj.costs[m], None)
        # Excluding m keeps the same set, so the child values stay valid.
        visit(nxt, chosen, s_cur, left, child_s)

    visit(0, [], s_empty, budget, None)
    return _report(obj, best[0], best[1], "exact", nodes, obj.evaluations - ev0)


SOLVERS = {
    "exact": solve_exact,
    "greedy": solve_greedy,
    "partial_enum": solve_partial_enum,
}


def solve(method: str, beliefs: DefenderBeliefs, cat: ControlCatalog, graph: AttackGraph,
          **kwargs) -> SolveReport:
    method = method.replace("-", "_")
    try:
        fn = SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(SOLVERS)}") from None
    return fn(beliefs, cat, graph, **kwargs)
