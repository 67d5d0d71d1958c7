"""Attacker side: myopic level-0 paths and maximum-reliability best responses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import AttackGraph, Edge, InstanceError, ReliabilityTable


class NoPathError(InstanceError):
    pass


class PathCountExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class AttackPath:
    edges: tuple[Edge, ...]
    reliability: float

    @property
    def nodes(self) -> tuple[int, ...]:
        if not self.edges:
            return ()
        return (self.edges[0][0],) + tuple(j for _, j in self.edges)


def path_product(edge_ids, rel: np.ndarray) -> float:
    """Product of reliabilities multiplied in path order."""
    p = 1.0
    for k in edge_ids:
        p *= float(rel[k])
    return p


def _as_path(graph: AttackGraph, edge_ids, rel: np.ndarray) -> AttackPath:
    return AttackPath(tuple(graph.edges[k] for k in edge_ids), path_product(edge_ids, rel))


def _check_perceived(graph: AttackGraph, perceived) -> np.ndarray:
    rel = np.asarray(perceived, dtype=float)
    if rel.shape != (graph.edge_count,):
        raise ValueError(f"perceived reliabilities must have shape ({graph.edge_count},)")
    if np.any(rel < 0) or np.any(rel > 1):
        raise ValueError("perceived reliabilities must lie in [0, 1]")
    return rel


def solve_opt_att(graph: AttackGraph, perceived, rng_seed: int | None = None) -> AttackPath:
    """Maximum-reliability source-sink path under ``perceived`` edge reliabilities.

    Equivalent to Dijkstra on ``-log(reliability)`` weights but run as a
    backward relaxation in topological order. Zero-reliability edges count as
    infinite weight; if every path crosses one, the path with the fewest such
    edges is returned (reliability 0). Ties go to the lexicographically
    smallest node sequence, so ``rng_seed`` is accepted for interface symmetry
    but never consumed.
    """
    rel = _check_perceived(graph, perceived)
    ga = graph.arrays
    ids = kernels.best_path(graph.node_count, ga.heads, ga.out_ptr, rel)
    if ids is None:
        raise NoPathError("graph has no source-sink path")
    return _as_path(graph, ids, rel)


def level0_path(
    graph: AttackGraph,
    rel: ReliabilityTable,
    attacker: str,
    rng_seed: int | np.random.Generator | list[int] | None = None,
) -> AttackPath:
    """Myopic walk: always take the outgoing edge with the highest un-interdicted reliability.

    Exact ties are broken uniformly at random from a generator seeded by
    ``rng_seed``.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    delta, _ = rel.deltas(attacker)
    ids = []
    v = graph.source
    while v != graph.sink:
        out = graph.out_edges[v]
        if not out:
            raise NoPathError(f"node {v} has no outgoing edge")
        best = max(delta[k] for k in out)
        ties = [k for k in out if delta[k] == best]
        k = ties[int(rng.integers(len(ties)))] if len(ties) > 1 else ties[0]
        ids.append(k)
        v = graph.edges[k][1]
    return _as_path(graph, ids, delta)


def brute_force_best_path(graph: AttackGraph, perceived, max_paths: int = 10**6) -> AttackPath:
    """Enumerate every source-sink path; same ranking and tie rule as :func:`solve_opt_att`."""
    rel = _check_perceived(graph, perceived)
    count = graph.count_paths()
    if count == 0:
        raise NoPathError("graph has no source-sink path")
    if count > max_paths:
        raise PathCountExceeded(f"{count} paths exceeds guard {max_paths}")

    best_key = None
    best_ids: list[int] = []
    # DFS visits paths in lexicographic node order; strict improvement keeps the first optimum.
    stack: list[tuple[int, list[int]]] = [(graph.source, [])]
    while stack:
        v, ids = stack.pop()
        if v == graph.sink:
            zeros = sum(1 for k in ids if rel[k] == 0.0)
            prod = path_product([k for k in ids if rel[k] > 0.0], rel)
            key = (-zeros, prod)
            if best_key is None or key > best_key:
                best_key, best_ids = key, ids
            continue
        for k in reversed(graph.out_edges[v]):
            stack.append((graph.edges[k][1], ids + [k]))
    return _as_path(graph, best_ids, rel)


def path_to_psi(path: AttackPath, graph: AttackGraph) -> np.ndarray:
    """Edge-indexed 0/1 vector marking the edges on ``path``."""
    psi = np.zeros(graph.edge_count, dtype=float)
    for e in path.edges:
        psi[graph.index_of(e)] = 1.0
    return psi

