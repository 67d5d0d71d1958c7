import numpy as np
import pytest

from ara_interdiction.generator import TABLE4_GRID, GenSpec, case_study_spec, generate, grid_out_degree
from ara_interdiction.graph import validate_instance
from ara_interdiction.io import dumps_instance


def test_two_layers_of_three():
    inst = generate(GenSpec(layers=2, nodes_per_layer=3, num_controls=2, budget=1, seed=5))
    assert inst.graph.edge_count == 3 + 9 + 3
    assert inst.graph.node_count == 8


def test_single_node_chain():
    inst = generate(GenSpec(layers=1, nodes_per_layer=1, num_controls=1, budget=1, seed=0))
    assert inst.graph.edges == ((1, 2), (2, 3))
    assert inst.graph.count_paths() == 1
    # Source and sink edges are never covered.
    assert not inst.catalog.controls[0].covered_edges


@pytest.mark.parametrize("seed", [0, 1, 2**63 + 11])
def test_same_seed_same_instance(seed):
    spec = GenSpec(layers=4, nodes_per_layer=4, num_controls=6, budget=3, budget_kind="knapsack",
                   alpha=0.3, alpha2=0.5, seed=seed, attacker_types=2)
    assert dumps_instance(generate(spec)) == dumps_instance(generate(spec))


def test_different_seeds_differ():
    a = generate(case_study_spec(1))
    b = generate(case_study_spec(2))
    assert dumps_instance(a) != dumps_instance(b)


def test_controls_do_not_perturb_topology():
    a = generate(GenSpec(layers=4, nodes_per_layer=5, num_controls=3, budget=1, seed=9))
    b = generate(GenSpec(layers=4, nodes_per_layer=5, num_controls=8, budget=1, seed=9))
    assert a.graph == b.graph
    assert np.array_equal(a.reliabilities.delta, b.reliabilities.delta)
    assert a.catalog.controls[:3] == b.catalog.controls[:3]


@pytest.mark.parametrize("seed", range(20))
def test_structure_invariants(seed):
    spec = GenSpec(layers=5, nodes_per_layer=int(1 + seed % 6), num_controls=4, budget=2,
                   budget_kind="knapsack", alpha=0.4, alpha2=1.0, seed=seed, attacker_types=2)
    inst = generate(spec)
    assert validate_instance(inst) == []
    g, n = inst.graph, inst.graph.node_count
    p = spec.nodes_per_layer
    for v in range(2, n - p):
        assert len(g.out_edges[v]) == min(3, p)
    rel = inst.reliabilities
    for k, (i, j) in enumerate(g.edges):
        if i == 1:
            assert (rel.delta[:, k] == 1).all() and (rel.delta_tilde[:, k] == 1).all()
        elif j == n:
            assert (rel.delta[:, k] > 0.5).all() and (rel.delta_tilde[:, k] == rel.delta[:, k]).all()
        else:
            assert (rel.delta_tilde[:, k] <= rel.delta[:, k]).all()
    for c in inst.catalog.controls:
        assert 0.5 <= c.cost <= 1.5
        assert all(i != 1 and j != n for i, j in c.covered_edges)


def test_shared_reliabilities():
    inst = generate(GenSpec(layers=3, nodes_per_layer=3, num_controls=1, budget=1, seed=4,
                            attacker_types=3, shared_reliabilities=True))
    d = inst.reliabilities.delta
    assert (d == d[0]).all()


def test_coverage_fraction_matches_alpha():
    fracs = []
    for seed in range(200):
        inst = generate(case_study_spec(seed))
        n = inst.graph.node_count
        mid = sum(1 for i, j in inst.graph.edges if i != 1 and j != n)
        fracs += [len(c.covered_edges) / mid for c in inst.catalog.controls]
    fracs = np.array(fracs)
    se = fracs.std(ddof=1) / np.sqrt(len(fracs))
    assert abs(fracs.mean() - 0.15) < 3 * se


def test_case_study_spec():
    s = case_study_spec()
    assert (s.layers, s.nodes_per_layer, s.num_controls, s.budget) == (5, 5, 10, 4)
    assert s.budget_kind == "cardinality" and s.alpha == 0.15


@pytest.mark.parametrize("bad", [
    dict(layers=0), dict(nodes_per_layer=0), dict(alpha=1.5), dict(alpha=0.8, alpha2=1.0),
    dict(budget_kind="other"), dict(seed=-1), dict(out_degree=0),
])
def test_spec_validation(bad):
    kw = dict(layers=2, nodes_per_layer=2, num_controls=1, budget=1) | bad
    with pytest.raises(ValueError):
        GenSpec(**kw)


def test_grid_out_degree_tracks_edge_counts():
    for layers, nodes, edges, _, _ in TABLE4_GRID:
        deg = grid_out_degree(layers, nodes, edges)
        got = 2 * nodes + (layers - 1) * nodes * (deg or nodes)
        assert abs(got - edges) / edges < 0.06
