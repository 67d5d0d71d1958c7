"""Seeded layered attack-graph instances.

Random streams are split by section so that, for example, adding controls does
not disturb the topology. Each stream is ``numpy.random.PCG64`` seeded with
``SeedSequence(seed, spawn_key=key)``:

======================  ===============
section                 spawn_key
======================  ===============
topology                ``(0,)``
reliabilities, type a   ``(1, a)``
cost of control m       ``(2, m)``
coverage of control m   ``(3, m)``
======================  ===============

Uniform ``(0, 1]`` draws are taken as ``1 - U[0, 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .graph import (
    AttackerPopulation,
    AttackGraph,
    Control,
    ControlCatalog,
    Instance,
    ReliabilityTable,
)

TOPOLOGY, RELIABILITY, COSTS, COVERAGE = 0, 1, 2, 3


@dataclass(frozen=True)
class GenSpec:
    layers: int
    nodes_per_layer: int
    num_controls: int
    budget: float
    budget_kind: Literal["cardinality", "knapsack"] = "cardinality"
    alpha: float = 0.15
    alpha2: float = 0.0
    seed: int = 0
    attacker_types: int = 1
    shared_reliabilities: bool = False
    # Edges leaving each non-final layer node; None connects consecutive layers completely.
    out_degree: int | None = 3

    def __post_init__(self) -> None:
        if self.layers < 1 or self.nodes_per_layer < 1:
            raise ValueError("layers and nodes_per_layer must be >= 1")
        if self.num_controls < 0:
            raise ValueError("num_controls must be >= 0")
        if self.attacker_types < 1:
            raise ValueError("attacker_types must be >= 1")
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        if self.budget_kind not in ("cardinality", "knapsack"):
            raise ValueError(f"unknown budget_kind {self.budget_kind!r}")
        if not 0.0 <= self.alpha <= 1.0 or self.alpha2 < 0:
            raise ValueError("alpha must lie in [0, 1] and alpha2 >= 0")
        if self.alpha * (1.0 + 0.5 * self.alpha2) > 1.0:
            raise ValueError("alpha * (1 + alpha2/2) must not exceed 1")
        if self.out_degree is not None and self.out_degree < 1:
            raise ValueError("out_degree must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def with_seed(self, seed: int) -> "GenSpec":
        return replace(self, seed=seed)


def case_study_spec(seed: int = 0) -> GenSpec:
    """Five layers of five nodes, choose 4 of 10 controls, 15% coverage."""
    return GenSpec(layers=5, nodes_per_layer=5, num_controls=10, budget=4,
                   budget_kind="cardinality", alpha=0.15, seed=seed)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _unit(rng: np.random.Generator, size=None):
    return 1.0 - rng.random(size)


def node_id(spec: GenSpec, layer: int, pos: int) -> int:
    """1-based node number of position ``pos`` (0-based) in ``layer`` (1-based)."""
    return 2 + (layer - 1) * spec.nodes_per_layer + pos


def _topology(spec: GenSpec) -> list[tuple[int, int]]:
    rng = _stream(spec.seed, TOPOLOGY)
    p = spec.nodes_per_layer
    deg = p if spec.out_degree is None else min(spec.out_degree, p)
    sink = spec.layers * p + 2
    edges = [(1, node_id(spec, 1, r)) for r in range(p)]
    for t in range(1, spec.layers):
        match = rng.permutation(p)
        for r in range(p):
            targets = [int(match[r])]
            others = [c for c in range(p) if c != match[r]]
            if deg > 1:
                targets += [int(c) for c in rng.choice(others, size=deg - 1, replace=False)]
            edges += [(node_id(spec, t, r), node_id(spec, t + 1, c)) for c in targets]
    edges += [(node_id(spec, spec.layers, r), sink) for r in range(p)]
    return edges


def generate(spec: GenSpec) -> Instance:
    """Build the layered instance described by ``spec``.

    Source edges have reliability 1 and sink edges ``U(0.5, 1]``; neither is
    ever covered by a control. Layer-to-layer edges get ``delta ~ U(0, 1]``
    and ``delta_tilde = U(0, 1] * delta``.
    """
    p = spec.nodes_per_layer
    n = spec.layers * p + 2
    graph = AttackGraph(n, tuple(_topology(spec)))
    E = graph.edge_count
    interdictable = np.array([i != 1 and j != n for i, j in graph.edges])
    sink_side = np.array([j == n for _, j in graph.edges])
    mid_idx = np.flatnonzero(interdictable)

    attackers = tuple(f"A{a + 1}" for a in range(spec.attacker_types))
    rows_d, rows_dt = [], []
    for a in range(spec.attacker_types):
        rng = _stream(spec.seed, RELIABILITY, 0 if spec.shared_reliabilities else a)
        d = np.ones(E)
        dt = np.ones(E)
        d[mid_idx] = _unit(rng, len(mid_idx))
        dt[mid_idx] = _unit(rng, len(mid_idx)) * d[mid_idx]
        sink_idx = np.flatnonzero(sink_side)
        d[sink_idx] = 0.5 + 0.5 * _unit(rng, len(sink_idx))
        dt[sink_idx] = d[sink_idx]
        rows_d.append(d)
        rows_dt.append(dt)
    rel = ReliabilityTable(attackers, np.array(rows_d), np.array(rows_dt))

    controls = []
    for m in range(spec.num_controls):
        if spec.budget_kind == "knapsack":
            cost = 0.5 + float(_stream(spec.seed, COSTS, m).random())
            prob = spec.alpha * (1.0 + spec.alpha2 * (cost - 1.0))
        else:
            cost, prob = 1.0, spec.alpha
        draws = _stream(spec.seed, COVERAGE, m).random(len(mid_idx))
        cover = frozenset(graph.edges[k] for k, u in zip(mid_idx.tolist(), draws) if u < prob)
        controls.append(Control(f"m{m + 1}", cost, cover))
    catalog = ControlCatalog(tuple(controls), spec.budget)
    return Instance(graph, rel, catalog, AttackerPopulation.uniform(attackers))


# (layers, nodes per layer, edges, controls, budget) as listed for the greedy-gap study.
TABLE4_GRID: tuple[tuple[int, int, int, int, int], ...] = (
    (5, 15, 930, 10, 5), (5, 15, 930, 20, 10),
    (10, 10, 920, 10, 5), (10, 10, 920, 20, 10),
    (10, 15, 2055, 12, 6), (10, 15, 2055, 24, 12),
    (10, 20, 3640, 14, 7), (10, 20, 3640, 30, 15),
    (10, 25, 5675, 16, 8), (10, 25, 5675, 34, 17),
    (15, 5, 360, 10, 5), (15, 5, 360, 20, 10),
    (15, 10, 1420, 12, 6), (15, 10, 1420, 24, 12),
    (15, 15, 3180, 14, 7), (15, 15, 3180, 30, 15),
    (15, 20, 3000, 16, 8), (15, 20, 3000, 34, 17),
    (15, 20, 5640, 16, 8), (15, 20, 5640, 34, 17),
    (15, 25, 4000, 18, 9), (15, 25, 4000, 40, 20),
    (15, 25, 8800, 18, 9), (15, 25, 8800, 40, 20),
    (20, 10, 1920, 14, 7), (20, 10, 1920, 30, 15),
    (20, 15, 4000, 16, 8), (20, 15, 4000, 34, 17),
    (20, 15, 4305, 16, 8), (20, 15, 4305, 34, 17),
    (20, 20, 4000, 18, 9), (20, 20, 4000, 40, 20),
    (20, 20, 7640, 18, 9), (20, 20, 7640, 40, 20),
    (20, 25, 5000, 20, 10), (20, 25, 5000, 44, 22),
    (20, 25, 11925, 20, 10), (20, 25, 11925, 44, 22),
    (25, 10, 2420, 16, 8), (25, 10, 2420, 34, 17),
)


def grid_out_degree(layers: int, nodes: int, edges: int) -> int | None:
    """Out-degree that reproduces a listed edge count (None means complete layers)."""
    if layers == 1:
        return None
    deg = round((edges - 2 * nodes) / ((layers - 1) * nodes))
    deg = max(1, min(deg, nodes))
    return None if deg == nodes else deg
