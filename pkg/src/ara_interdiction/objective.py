"""Defender objective: probability an attack succeeds under a portfolio.

The success probability is a flow recursion over the DAG. Each belief
attacker starts with mass 1 at the source. On edge ``(j, l)`` it moves
``reach(j) * psi(j, l) * r(j, l)``, where ``r`` is ``delta_tilde`` if the edge
is covered and ``delta`` otherwise. Success is the mass that reaches the sink.
The minimisation drives the reach inequalities to equality, so the DP uses
equalities. With 0/1 path beliefs it reduces to a weighted sum of path
products ``g(S, p, A)``.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .attacker import AttackPath, path_to_psi
from .graph import AttackGraph, ControlCatalog, Edge, ReliabilityTable, covered_edges


@dataclass(frozen=True)
class BeliefAttacker:
    """One (attacker type, believed level) component of the defender's mixture."""

    attacker: str
    weight: float
    psi: np.ndarray
    level: int | None = None
    path: AttackPath | None = None


@dataclass(frozen=True)
class DefenderBeliefs:
    entries: tuple[BeliefAttacker, ...]
    reliabilities: ReliabilityTable

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        ws = [b.weight for b in self.entries]
        if any(w < 0 for w in ws):
            raise ValueError("belief weights must be non-negative")
        if self.entries and abs(sum(ws) - 1.0) > 1e-12:
            raise ValueError(f"belief weights sum to {sum(ws)!r}, expected 1")

    @classmethod
    def from_paths(
        cls,
        items: Iterable[tuple[str, float, AttackPath] | tuple[str, float, AttackPath, int]],
        graph: AttackGraph,
        rel: ReliabilityTable,
    ) -> "DefenderBeliefs":
        entries = []
        for item in items:
            attacker, weight, path = item[:3]
            level = item[3] if len(item) > 3 else None
            entries.append(BeliefAttacker(attacker, float(weight), path_to_psi(path, graph), level, path))
        return cls(tuple(entries), rel)


@dataclass(frozen=True)
class PortfolioValue:
    portfolio: tuple[str, ...]
    covered: frozenset[Edge]
    attack_success: float
    prevented: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "prevented", 1.0 - self.attack_success)


def path_reliability_g(
    S: Iterable[Edge], path: AttackPath, attacker: str, rel: ReliabilityTable, graph: AttackGraph
) -> float:
    """Product along ``path`` of ``delta_tilde`` on edges in ``S`` and ``delta`` elsewhere."""
    S = set(S)
    d, dt = rel.deltas(attacker)
    p = 1.0
    for e in path.edges:
        k = graph.index_of(e)
        p *= float(dt[k]) if e in S else float(d[k])
    return p


class DefenderObjective:
    """Compiled set function over control indices, with a bounded LRU cache.

    Internally everything is kept in *success* space (lower is better); the
    prevented value handed to callers is ``1 - success``.
    """

    def __init__(
        self,
        beliefs: DefenderBeliefs,
        cat: ControlCatalog,
        graph: AttackGraph,
        cache_size: int = 1 << 16,
    ):
        self.beliefs = beliefs
        self.catalog = cat
        self.graph = graph
        self.costs = np.array([c.cost for c in cat.controls], dtype=float)
        self.budget = cat.budget

        ptr, ctrl_edges = [0], []
        for c in cat.controls:
            ctrl_edges.extend(sorted(graph.index_of(e) for e in c.covered_edges))
            ptr.append(len(ctrl_edges))
        self.ctrl_ptr = np.array(ptr, dtype=np.int64)
        self.ctrl_edges = np.array(ctrl_edges, dtype=np.int64)

        rel = beliefs.reliabilities
        sup_ptr, sup_edge, sup_psi, sup_d, sup_dt, weights = [0], [], [], [], [], []
        for b in beliefs.entries:
            psi = np.asarray(b.psi, dtype=float)
            if psi.shape != (graph.edge_count,):
                raise ValueError("psi must be edge-indexed")
            d, dt = rel.deltas(b.attacker)
            support = np.flatnonzero(psi > 0)
            sup_edge.extend(support.tolist())
            sup_psi.extend(psi[support].tolist())
            sup_d.extend(d[support].tolist())
            sup_dt.extend(dt[support].tolist())
            sup_ptr.append(len(sup_edge))
            weights.append(b.weight)
        ga = graph.arrays
        self.kernel = kernels.BeliefKernel(
            graph.node_count, ga.tails, ga.heads,
            np.array(sup_ptr, dtype=np.int64), np.array(sup_edge, dtype=np.int64),
            np.array(sup_psi, dtype=float), np.array(sup_d, dtype=float),
            np.array(sup_dt, dtype=float), np.array(weights, dtype=float),
        )
        self._cache: OrderedDict[int, float] = OrderedDict()
        self._cache_size = cache_size
        self.evaluations = 0

    @staticmethod
    def key(indices: Iterable[int]) -> int:
        k = 0
        for i in indices:
            k |= 1 << i
        return k

    def mask(self, indices: Iterable[int]) -> np.ndarray:
        m = np.zeros(self.graph.edge_count, dtype=np.uint8)
        for i in indices:
            m[self.ctrl_edges[self.ctrl_ptr[i]:self.ctrl_ptr[i + 1]]] = 1
        return m

    def _remember(self, key: int, value: float) -> None:
        self._cache[key] = value
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)

    def success(self, indices: Sequence[int]) -> float:
        key = self.key(indices)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        self.evaluations += 1
        value = float(self.kernel.success(self.mask(indices)))
        self._remember(key, value)
        return value

    def success_with_each(self, indices: Sequence[int], candidates: Sequence[int]) -> np.ndarray:
        """Success of ``indices + [m]`` for every ``m`` in ``candidates``."""
        base = self.key(indices)
        out = np.empty(len(candidates), dtype=float)
        todo = []
        for k, m in enumerate(candidates):
            hit = self._cache.get(base | (1 << m))
            if hit is None:
                todo.append(k)
            else:
                out[k] = hit
        if todo:
            cand = np.array([candidates[k] for k in todo], dtype=np.int64)
            vals = self.kernel.success_batch(self.mask(indices), self.ctrl_ptr, self.ctrl_edges, cand)
            self.evaluations += len(todo)
            for k, m, v in zip(todo, cand.tolist(), vals.tolist()):
                out[k] = v
                self._remember(base | (1 << m), v)
        return out

    def value(self, indices: Sequence[int]) -> float:
        return 1.0 - self.success(indices)

    def indices(self, portfolio: Iterable[str]) -> list[int]:
        return sorted({self.catalog.index(m) for m in portfolio})

    def ids(self, indices: Iterable[int]) -> tuple[str, ...]:
        return tuple(self.catalog.controls[i].id for i in sorted(indices))


def attack_success(
    portfolio: Iterable[str], beliefs: DefenderBeliefs, cat: ControlCatalog, graph: AttackGraph
) -> PortfolioValue:
    """Believed probability that an attack succeeds against ``portfolio``.

    Budget feasibility is not checked. Unknown control ids raise
    :class:`~ara_interdiction.graph.UnknownControlError`.
    """
    portfolio = cat.canonical(portfolio)
    obj = DefenderObjective(beliefs, cat, graph, cache_size=1)
    s = obj.success(obj.indices(portfolio))
    return PortfolioValue(portfolio, covered_edges(portfolio, cat), s)


def f_prevented(
    portfolio: Iterable[str], beliefs: DefenderBeliefs, cat: ControlCatalog, graph: AttackGraph
) -> float:
    """The monotone submodular set function maximised by the defender."""
    return attack_success(portfolio, beliefs, cat, graph).prevented
