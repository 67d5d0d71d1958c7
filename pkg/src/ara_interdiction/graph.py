"""Attack graph, reliability table and control catalog.

Nodes are numbered ``1..n`` with the source at ``1`` and the sink at ``n``.
Every edge ``(i, j)`` satisfies ``i < j``, so the numbering is itself a
topological order. Edges are stored sorted by ``(tail, head)``; the position of
an edge in that order is its *edge index* and is what the numeric arrays in
:class:`ReliabilityTable` and the kernels are aligned to.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Edge = tuple[int, int]


class InstanceError(ValueError):
    """Raised when an instance violates a structural invariant."""


class UnknownControlError(KeyError):
    pass


@dataclass(frozen=True)
class AttackGraph:
    """Layered/DAG attack graph with source ``1`` and sink ``n``.

    The constructor only normalises the edge list (sorting, tuple-ifying);
    structural checks live in :func:`validate` so that malformed input can be
    reported instead of raising half-way through loading.
    """

    node_count: int
    edges: tuple[Edge, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        norm = tuple(sorted((int(i), int(j)) for i, j in self.edges))
        object.__setattr__(self, "edges", norm)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    @property
    def source(self) -> int:
        return 1

    @property
    def sink(self) -> int:
        return self.node_count

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {e: k for k, e in enumerate(self.edges)}

    def index_of(self, edge: Sequence[int]) -> int:
        try:
            return self.edge_index[(int(edge[0]), int(edge[1]))]
        except KeyError:
            raise InstanceError(f"edge {tuple(edge)} is not in the graph") from None

    @cached_property
    def out_edges(self) -> tuple[tuple[int, ...], ...]:
        """Edge indices leaving each node (position 0 unused), sorted by head."""
        out: list[list[int]] = [[] for _ in range(self.node_count + 1)]
        for k, (i, _) in enumerate(self.edges):
            if 1 <= i <= self.node_count:
                out[i].append(k)
        return tuple(tuple(x) for x in out)

    @cached_property
    def in_edges(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in range(self.node_count + 1)]
        for k, (_, j) in enumerate(self.edges):
            if 1 <= j <= self.node_count:
                inc[j].append(k)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def arrays(self) -> "GraphArrays":
        """0-based CSR view used by the numeric kernels."""
        tails = np.array([i - 1 for i, _ in self.edges], dtype=np.int64)
        heads = np.array([j - 1 for _, j in self.edges], dtype=np.int64)
        counts = np.bincount(tails, minlength=self.node_count) if len(tails) else np.zeros(self.node_count, np.int64)
        out_ptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(counts, out=out_ptr[1:])
        return GraphArrays(self.node_count, tails, heads, out_ptr)

    def topological_order(self) -> list[int]:
        """Kahn's algorithm with smallest-index-first, deterministic."""
        import heapq

        indeg = [0] * (self.node_count + 1)
        for _, j in self.edges:
            indeg[j] += 1
        heap = [v for v in range(1, self.node_count + 1) if indeg[v] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            v = heapq.heappop(heap)
            order.append(v)
            for k in self.out_edges[v]:
                w = self.edges[k][1]
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(heap, w)
        if len(order) != self.node_count:
            raise InstanceError("graph contains a cycle")
        return order

    def count_paths(self) -> int:
        """Number of source-sink paths (exact integer)."""
        ways = [0] * (self.node_count + 1)
        ways[self.sink] = 1
        for v in range(self.node_count - 1, 0, -1):
            ways[v] = sum(ways[self.edges[k][1]] for k in self.out_edges[v])
        return ways[self.source]

    def label(self, node: int) -> str:
        if self.labels is None:
            return str(node)
        return self.labels[node - 1]


@dataclass(frozen=True)
class GraphArrays:
    node_count: int
    tails: np.ndarray
    heads: np.ndarray
    out_ptr: np.ndarray


@dataclass(frozen=True)
class ReliabilityTable:
    """Per attacker type: un-interdicted ``delta`` and interdicted ``delta_tilde``.

    ``delta`` and ``delta_tilde`` have shape ``(len(attackers), edge_count)``
    with columns in graph edge-index order.
    """

    attackers: tuple[str, ...]
    delta: np.ndarray
    delta_tilde: np.ndarray

    def __post_init__(self) -> None:
        d = np.array(self.delta, dtype=float, copy=True)
        dt = np.array(self.delta_tilde, dtype=float, copy=True)
        d.setflags(write=False)
        dt.setflags(write=False)
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "delta_tilde", dt)
        object.__setattr__(self, "attackers", tuple(self.attackers))

    @cached_property
    def _row(self) -> dict[str, int]:
        return {a: r for r, a in enumerate(self.attackers)}

    def row(self, attacker: str) -> int:
        try:
            return self._row[attacker]
        except KeyError:
            raise InstanceError(f"no reliabilities for attacker {attacker!r}") from None

    def deltas(self, attacker: str) -> tuple[np.ndarray, np.ndarray]:
        r = self.row(attacker)
        return self.delta[r], self.delta_tilde[r]

    @classmethod
    def shared(cls, attackers: Iterable[str], delta, delta_tilde) -> "ReliabilityTable":
        attackers = tuple(attackers)
        d = np.tile(np.asarray(delta, dtype=float), (len(attackers), 1))
        dt = np.tile(np.asarray(delta_tilde, dtype=float), (len(attackers), 1))
        return cls(attackers, d, dt)


@dataclass(frozen=True)
class Control:
    id: str
    cost: float
    covered_edges: frozenset[Edge] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "cost", float(self.cost))
        object.__setattr__(
            self, "covered_edges", frozenset((int(i), int(j)) for i, j in self.covered_edges)
        )


@dataclass(frozen=True)
class ControlCatalog:
    controls: tuple[Control, ...]
    budget: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "budget", float(self.budget))

    @cached_property
    def _index(self) -> dict[str, int]:
        return {c.id: k for k, c in enumerate(self.controls)}

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.controls)

    def __len__(self) -> int:
        return len(self.controls)

    def index(self, control_id: str) -> int:
        try:
            return self._index[control_id]
        except KeyError:
            raise UnknownControlError(control_id) from None

    def get(self, control_id: str) -> Control:
        return self.controls[self.index(control_id)]

    def cost_of(self, portfolio: Iterable[str]) -> float:
        return sum(self.get(m).cost for m in portfolio)

    def canonical(self, portfolio: Iterable[str]) -> tuple[str, ...]:
        """Portfolio ids in catalog order, duplicates removed."""
        idx = sorted({self.index(m) for m in portfolio})
        return tuple(self.controls[k].id for k in idx)


@dataclass(frozen=True)
class AttackerPopulation:
    attackers: tuple[str, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "attackers", tuple(str(a) for a in self.attackers))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @classmethod
    def uniform(cls, attackers: Sequence[str]) -> "AttackerPopulation":
        return cls(tuple(attackers), tuple(1.0 / len(attackers) for _ in attackers))

    def items(self) -> list[tuple[str, float]]:
        return list(zip(self.attackers, self.weights))


@dataclass(frozen=True)
class Instance:
    graph: AttackGraph
    reliabilities: ReliabilityTable
    catalog: ControlCatalog
    population: AttackerPopulation


def covered_edges(portfolio: Iterable[str], cat: ControlCatalog) -> frozenset[Edge]:
    """Union of the edges covered by the selected controls."""
    out: set[Edge] = set()
    for m in portfolio:
        out |= cat.get(m).covered_edges
    return frozenset(out)


def covered_mask(portfolio: Iterable[str], cat: ControlCatalog, graph: AttackGraph) -> np.ndarray:
    mask = np.zeros(graph.edge_count, dtype=np.uint8)
    for e in covered_edges(portfolio, cat):
        mask[graph.index_of(e)] = 1
    return mask


def perceived_reliabilities(
    portfolio: Iterable[str], attacker: str, inst: Instance
) -> np.ndarray:
    """Edge reliabilities an attacker expects under a believed portfolio."""
    d, dt = inst.reliabilities.deltas(attacker)
    mask = covered_mask(portfolio, inst.catalog, inst.graph).astype(bool)
    return np.where(mask, dt, d)


def validate(
    graph: AttackGraph,
    rel: ReliabilityTable | None = None,
    cat: ControlCatalog | None = None,
    population: AttackerPopulation | None = None,
) -> list[str]:
    """Return a list of invariant violations; empty means the instance is valid."""
    report: list[str] = []
    n = graph.node_count
    if n < 2:
        report.append(f"graph: node_count {n} < 2")
    seen: set[Edge] = set()
    for i, j in graph.edges:
        if not (1 <= i <= n and 1 <= j <= n):
            report.append(f"edge ({i},{j}): node out of range 1..{n}")
            continue
        if i >= j:
            report.append(f"edge ({i},{j}): ordering/acyclicity violated (tail must be < head)")
        if (i, j) in seen:
            report.append(f"edge ({i},{j}): parallel edge")
        seen.add((i, j))
    if not report:
        fwd = [False] * (n + 1)
        fwd[1] = True
        for i, j in graph.edges:
            if fwd[i]:
                fwd[j] = True
        bwd = [False] * (n + 1)
        bwd[n] = True
        for i, j in reversed(graph.edges):
            if bwd[j]:
                bwd[i] = True
        for v in range(1, n + 1):
            if not fwd[v]:
                report.append(f"node {v}: not reachable from source")
            if not bwd[v]:
                report.append(f"node {v}: does not reach sink")

    if rel is not None:
        shape = (len(rel.attackers), graph.edge_count)
        if rel.delta.shape != shape or rel.delta_tilde.shape != shape:
            report.append(f"reliabilities: expected shape {shape}, got {rel.delta.shape}")
        else:
            for r, a in enumerate(rel.attackers):
                for k, (i, j) in enumerate(graph.edges):
                    d, dt = rel.delta[r, k], rel.delta_tilde[r, k]
                    where = f"reliability ({i},{j}) attacker {a}"
                    if not (0.0 < d <= 1.0):
                        report.append(f"{where}: delta {d} outside (0,1]")
                    if not (0.0 <= dt <= 1.0):
                        report.append(f"{where}: delta_tilde {dt} outside [0,1]")
                    if dt > d:
                        report.append(f"{where}: interdicted reliability exceeds un-interdicted")

    if cat is not None:
        if cat.budget < 0:
            report.append(f"budget {cat.budget} is negative")
        ids: set[str] = set()
        for c in cat.controls:
            if c.id in ids:
                report.append(f"control {c.id}: duplicate id")
            ids.add(c.id)
            if not c.cost > 0:
                report.append(f"control {c.id}: cost {c.cost} must be positive")
            for e in sorted(c.covered_edges):
                if e not in graph.edge_index:
                    report.append(f"control {c.id}: covered edge {e} not in graph")

    if population is not None:
        if any(w < 0 for w in population.weights):
            report.append("attackers: negative weight")
        if abs(sum(population.weights) - 1.0) > 1e-12:
            report.append(f"attackers: weights sum to {sum(population.weights)!r}, not 1")
        if len(set(population.attackers)) != len(population.attackers):
            report.append("attackers: duplicate id")
        if rel is not None:
            for a in population.attackers:
                if a not in rel.attackers:
                    report.append(f"attackers: no reliabilities for {a}")
    return report


def validate_instance(inst: Instance) -> list[str]:
    return validate(inst.graph, inst.reliabilities, inst.catalog, inst.population)


def require_valid(inst: Instance) -> Instance:
    report = validate_instance(inst)
    if report:
        raise InstanceError("; ".join(report))
    return inst

