import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ara_interdiction.attacker import AttackPath, path_to_psi
from ara_interdiction.generator import GenSpec, generate
from ara_interdiction.graph import covered_edges, covered_mask
from ara_interdiction.objective import (
    BeliefAttacker,
    DefenderBeliefs,
    DefenderObjective,
    attack_success,
    f_prevented,
    path_reliability_g,
)
from conftest import ara_beliefs, oracle_success, small_instance

LEFT = AttackPath(((1, 2), (2, 4), (4, 6)), 0.09)
RIGHT = AttackPath(((1, 3), (3, 5), (5, 6)), 0.102)


def fixture_beliefs(inst, paths):
    w = 1.0 / len(paths)
    return DefenderBeliefs.from_paths([("thief", w, p) for p in paths], inst.graph, inst.reliabilities)


def test_fixture_values(fixture_instance):
    inst = fixture_instance
    b = fixture_beliefs(inst, [RIGHT])
    assert attack_success(["m3"], b, inst.catalog, inst.graph).attack_success == pytest.approx(0.074, abs=1e-12)
    b = fixture_beliefs(inst, [RIGHT, RIGHT, LEFT])
    assert attack_success(["m1"], b, inst.catalog, inst.graph).attack_success == pytest.approx(0.078, abs=1e-12)
    S = covered_edges(["m2"], inst.catalog)
    assert path_reliability_g(S, LEFT, "thief", inst.reliabilities, inst.graph) == pytest.approx(0.036)


def test_g_extremes(fixture_instance):
    inst = fixture_instance
    rel = inst.reliabilities
    assert path_reliability_g(set(), RIGHT, "thief", rel, inst.graph) == pytest.approx(0.5 * 0.51 * 0.4)
    assert path_reliability_g(set(RIGHT.edges), RIGHT, "thief", rel, inst.graph) == pytest.approx(0.5 * 0.37 * 0.3)


def test_empty_portfolio(fixture_instance):
    inst = fixture_instance
    b = fixture_beliefs(inst, [RIGHT, LEFT])
    assert f_prevented([], b, inst.catalog, inst.graph) == pytest.approx(1 - (0.102 + 0.09) / 2)


def test_weights_must_sum_to_one(fixture_instance):
    inst = fixture_instance
    with pytest.raises(ValueError):
        DefenderBeliefs.from_paths([("thief", 0.4, RIGHT)], inst.graph, inst.reliabilities)


@pytest.mark.parametrize("seed", range(25))
def test_dp_matches_path_oracle(seed):
    inst = small_instance(seed)
    beliefs = ara_beliefs(inst)
    obj = DefenderObjective(beliefs, inst.catalog, inst.graph)
    rng = np.random.default_rng(seed)
    for _ in range(10):
        sub = [m for m in inst.catalog.ids if rng.random() < 0.4]
        got = obj.success(obj.indices(sub))
        assert got == pytest.approx(oracle_success(sub, beliefs, inst), abs=1e-14)


def _all_paths(graph):
    out = []

    def walk(v, edges):
        if v == graph.sink:
            out.append(edges)
            return
        for k in graph.out_edges[v]:
            walk(graph.edges[k][1], edges + [k])

    walk(graph.source, [])
    return out


@pytest.mark.parametrize("seed", range(10))
def test_fractional_beliefs_match_path_enumeration(seed):
    inst = generate(GenSpec(layers=3, nodes_per_layer=3, num_controls=4, budget=2,
                            alpha=0.4, seed=seed, attacker_types=2))
    g, rel = inst.graph, inst.reliabilities
    rng = np.random.default_rng(seed)
    entries = []
    for a, w in zip(rel.attackers, (0.3, 0.7)):
        psi = np.zeros(g.edge_count)
        for v in range(1, g.node_count):
            out = list(g.out_edges[v])
            if out:
                psi[out] = rng.dirichlet(np.ones(len(out)))
        entries.append(BeliefAttacker(a, w, psi))
    beliefs = DefenderBeliefs(tuple(entries), rel)
    paths = _all_paths(g)
    for sub in [(), ("m1",), ("m2", "m4"), inst.catalog.ids]:
        mask = covered_mask(sub, inst.catalog, g).astype(bool)
        expect = 0.0
        for b in entries:
            d, dt = rel.deltas(b.attacker)
            r = np.where(mask, dt, d)
            expect += b.weight * sum(np.prod(b.psi[p] * r[p]) for p in paths)
        got = attack_success(sub, beliefs, inst.catalog, g).attack_success
        assert got == pytest.approx(expect, rel=1e-12, abs=1e-15)


def test_batch_matches_single(fixture_instance):
    inst = small_instance(3)
    obj = DefenderObjective(ara_beliefs(inst), inst.catalog, inst.graph, cache_size=1)
    cands = list(range(1, len(inst.catalog)))
    batch = obj.success_with_each([0], cands)
    for m, v in zip(cands, batch):
        assert v == obj.success([0, m])


def test_cache_is_bounded():
    inst = small_instance(4)
    obj = DefenderObjective(ara_beliefs(inst), inst.catalog, inst.graph, cache_size=4)
    for sub in itertools.combinations(range(len(inst.catalog)), 2):
        obj.success(sub)
    assert len(obj._cache) <= 4


def test_monotone_on_nested_pairs():
    rng = np.random.default_rng(0)
    for seed in range(100):
        inst = small_instance(seed)
        beliefs = ara_beliefs(inst)
        ids = inst.catalog.ids
        Q = [m for m in ids if rng.random() < 0.6]
        P = [m for m in Q if rng.random() < 0.5]
        assert f_prevented(P, beliefs, inst.catalog, inst.graph) <= f_prevented(Q, beliefs, inst.catalog, inst.graph) + 1e-15


@settings(max_examples=200, deadline=None)
@given(
    d=st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4),
    ratio=st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4),
    s=st.lists(st.booleans(), min_size=4, max_size=4),
    e=st.permutations(range(4)),
)
def test_g_supermodular(d, ratio, s, e):
    from ara_interdiction.graph import AttackGraph, ReliabilityTable

    g = AttackGraph(5, ((1, 2), (2, 3), (3, 4), (4, 5)))
    rel = ReliabilityTable.shared(("A",), d, [x * y for x, y in zip(d, ratio)])
    path = AttackPath(g.edges, 0.0)
    e1, e2 = g.edges[e[0]], g.edges[e[1]]
    S = {g.edges[k] for k in range(4) if s[k]} - {e1, e2}

    def G(X):
        return path_reliability_g(X, path, "A", rel, g)

    assert G(S) + G(S | {e1, e2}) - G(S | {e1}) - G(S | {e2}) >= -1e-12


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), data=st.data())
def test_f_diminishing_returns(seed, data):
    inst = small_instance(seed)
    beliefs = ara_beliefs(inst)
    obj = DefenderObjective(beliefs, inst.catalog, inst.graph)
    n = len(inst.catalog)
    B = data.draw(st.sets(st.integers(0, n - 1)))
    A = data.draw(st.sets(st.sampled_from(sorted(B)))) if B else set()
    rest = [m for m in range(n) if m not in B]
    if not rest:
        return
    m = data.draw(st.sampled_from(rest))
    gain_A = obj.value(sorted(A | {m})) - obj.value(sorted(A))
    gain_B = obj.value(sorted(B | {m})) - obj.value(sorted(B))
    assert gain_A - gain_B >= -1e-12
