"""Instance file reading and writing.

Layout::

    {
      "graph": {"node_count": 6, "edges": [[1, 2], [1, 3], ...]},
      "reliabilities": {"A": [[i, j, delta, delta_tilde], ...], ...},
      "controls": [{"id": "m1", "cost": 1.0, "covered_edges": [[4, 6], ...]}],
      "budget": 1.0,
      "attackers": [{"id": "A", "weight": 1.0}]
    }

``graph`` may instead give ``"nodes": [label, ...]`` with edges written in
terms of those labels; the loader then renumbers nodes into canonical
``1..n`` topological form (source first, sink last) and keeps the labels.
The key ``"shared"`` under ``reliabilities`` supplies one table for every
attacker type that has no table of its own.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .graph import (
    AttackerPopulation,
    AttackGraph,
    Control,
    ControlCatalog,
    Instance,
    InstanceError,
    ReliabilityTable,
    validate_instance,
)

SHARED = "shared"


def _canonical_nodes(graph_doc: dict) -> tuple[int, list[tuple[int, int]], dict[Any, int], tuple[str, ...] | None]:
    if "nodes" in graph_doc:
        labels = list(graph_doc["nodes"])
        if len(set(map(str, labels))) != len(labels):
            raise InstanceError("graph: duplicate node labels")
        pos = {str(x): k for k, x in enumerate(labels)}
        raw = []
        for e in graph_doc.get("edges", []):
            try:
                raw.append((pos[str(e[0])], pos[str(e[1])]))
            except KeyError as exc:
                raise InstanceError(f"graph: edge {e} references unknown node {exc}") from None
        n = len(labels)
        indeg = [0] * n
        outs: list[list[int]] = [[] for _ in range(n)]
        for a, b in raw:
            indeg[b] += 1
            outs[a].append(b)
        sources = [v for v in range(n) if indeg[v] == 0]
        sinks = [v for v in range(n) if not outs[v]]
        if len(sources) != 1 or len(sinks) != 1:
            raise InstanceError(
                f"graph: need exactly one source and one sink, found {len(sources)} and {len(sinks)}"
            )
        # Kahn ordering, ties by original position; the sink is forced last.
        import heapq

        heap = list(sources)
        order = []
        while heap:
            v = heapq.heappop(heap)
            order.append(v)
            for w in outs[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(heap, w)
        if len(order) != n:
            raise InstanceError("graph: contains a cycle")
        order.remove(sinks[0])
        order.append(sinks[0])
        renum = {v: k + 1 for k, v in enumerate(order)}
        edges = [(renum[a], renum[b]) for a, b in raw]
        lookup: dict[Any, int] = {str(labels[v]): renum[v] for v in range(n)}
        ordered_labels = tuple(str(labels[v]) for v in order)
        return n, edges, lookup, ordered_labels
    n = int(graph_doc["node_count"])
    edges = [(int(e[0]), int(e[1])) for e in graph_doc.get("edges", [])]
    return n, edges, {}, None


def instance_from_dict(doc: dict) -> Instance:
    """Build an :class:`Instance` from a parsed document and validate it.

    Raises :class:`InstanceError` listing every violation.
    """
    try:
        n, edges, lookup, labels = _canonical_nodes(doc["graph"])
        if len(set(edges)) != len(edges):
            raise InstanceError("graph: parallel edge")

        def node(x) -> int:
            return lookup[str(x)] if lookup else int(x)

        graph = AttackGraph(n, tuple(edges), labels)
        attackers = [str(a["id"]) for a in doc["attackers"]]
        weights = [float(a["weight"]) for a in doc["attackers"]]
        population = AttackerPopulation(tuple(attackers), tuple(weights))

        tables = doc["reliabilities"]
        rows_d, rows_dt = [], []
        for a in attackers:
            entries = tables.get(a, tables.get(SHARED))
            if entries is None:
                raise InstanceError(f"reliabilities: missing table for attacker {a}")
            d = np.full(graph.edge_count, np.nan)
            dt = np.full(graph.edge_count, np.nan)
            for i, j, delta, delta_tilde in entries:
                k = graph.index_of((node(i), node(j)))
                d[k], dt[k] = float(delta), float(delta_tilde)
            missing = [graph.edges[k] for k in np.flatnonzero(np.isnan(d))]
            if missing:
                raise InstanceError(f"reliabilities: attacker {a} missing edges {missing[:5]}")
            rows_d.append(d)
            rows_dt.append(dt)
        rel = ReliabilityTable(tuple(attackers), np.array(rows_d), np.array(rows_dt))

        controls = tuple(
            Control(
                str(c["id"]),
                float(c["cost"]),
                frozenset((node(e[0]), node(e[1])) for e in c.get("covered_edges", [])),
            )
            for c in doc["controls"]
        )
        catalog = ControlCatalog(controls, float(doc["budget"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"malformed instance document: {exc!r}") from None

    inst = Instance(graph, rel, catalog, population)
    report = validate_instance(inst)
    if report:
        raise InstanceError("; ".join(report))
    return inst


def instance_to_dict(inst: Instance, shared: bool = False) -> dict:
    g = inst.graph
    rel = inst.reliabilities
    if g.labels is None:
        graph_doc: dict = {"node_count": g.node_count, "edges": [list(e) for e in g.edges]}

        def name(v: int):
            return v
    else:
        graph_doc = {"nodes": list(g.labels), "edges": [[g.label(i), g.label(j)] for i, j in g.edges]}
        name = g.label

    def table(r: int) -> list:
        return [
            [name(i), name(j), float(rel.delta[r, k]), float(rel.delta_tilde[r, k])]
            for k, (i, j) in enumerate(g.edges)
        ]

    if shared:
        tables = {SHARED: table(0)}
    else:
        tables = {a: table(r) for r, a in enumerate(rel.attackers)}
    return {
        "graph": graph_doc,
        "reliabilities": tables,
        "controls": [
            {
                "id": c.id,
                "cost": c.cost,
                "covered_edges": [[name(i), name(j)] for i, j in sorted(c.covered_edges)],
            }
            for c in inst.catalog.controls
        ],
        "budget": inst.catalog.budget,
        "attackers": [{"id": a, "weight": w} for a, w in inst.population.items()],
    }


def load_instance(path: str | Path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: not valid JSON ({exc})") from None
    return instance_from_dict(doc)


def dumps_instance(inst: Instance, shared: bool = False) -> str:
    return json.dumps(instance_to_dict(inst, shared=shared), indent=1) + "\n"


def save_instance(inst: Instance, path: str | Path, shared: bool = False) -> None:
    Path(path).write_text(dumps_instance(inst, shared=shared), encoding="utf-8")


def example_instance() -> Instance:
    """The two-path server-theft attack graph with controls m1..m3."""
    text = resources.files("ara_interdiction").joinpath("data/server_theft.json").read_text("utf-8")
    return instance_from_dict(json.loads(text))
