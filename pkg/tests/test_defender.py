import math

import pytest

from ara_interdiction.attacker import AttackPath
from ara_interdiction.defender import (
    GUARANTEES,
    SearchLimitExceeded,
    solve,
    solve_exact,
    solve_greedy,
    solve_partial_enum,
)
from ara_interdiction.generator import case_study_spec, generate
from ara_interdiction.graph import AttackGraph, Control, ControlCatalog, ReliabilityTable
from ara_interdiction.objective import DefenderBeliefs, f_prevented
from conftest import ara_beliefs, exhaustive_best, small_instance

LEFT = AttackPath(((1, 2), (2, 4), (4, 6)), 0.09)
RIGHT = AttackPath(((1, 3), (3, 5), (5, 6)), 0.102)


def test_fixture_level_four(fixture_instance):
    inst = fixture_instance
    beliefs = DefenderBeliefs.from_paths(
        [("thief", 0.25, p) for p in (RIGHT, RIGHT, LEFT, LEFT)], inst.graph, inst.reliabilities)
    for method in ("exact", "greedy", "partial-enum"):
        rep = solve(method, beliefs, inst.catalog, inst.graph)
        assert rep.portfolio == ("m2",)
        assert rep.attack_success == pytest.approx(0.069, abs=1e-12)
        assert rep.value == pytest.approx(0.931, abs=1e-12)


def test_unknown_method(fixture_instance):
    inst = fixture_instance
    b = DefenderBeliefs.from_paths([("thief", 1.0, RIGHT)], inst.graph, inst.reliabilities)
    with pytest.raises(ValueError):
        solve("simplex", b, inst.catalog, inst.graph)


def test_guarantee_constants():
    assert GUARANTEES["greedy"] == pytest.approx(1 - 1 / math.sqrt(math.e))
    assert GUARANTEES["partial_enum"] == pytest.approx(1 - 1 / math.e)


def test_large_budget_takes_every_useful_control():
    inst = small_instance(11)
    beliefs = ara_beliefs(inst)
    cat = ControlCatalog(inst.catalog.controls, sum(c.cost for c in inst.catalog.controls))
    rep = solve_exact(beliefs, cat, inst.graph)
    assert rep.value == pytest.approx(f_prevented(cat.ids, beliefs, cat, inst.graph), abs=1e-15)


def test_single_useful_control():
    g = AttackGraph(3, ((1, 2), (2, 3)))
    rel = ReliabilityTable.shared(("A",), [0.9, 0.8], [0.9, 0.1])
    cat = ControlCatalog((Control("a", 1.0, frozenset({(1, 2)})), Control("b", 1.0, frozenset({(2, 3)}))), 1.0)
    b = DefenderBeliefs.from_paths([("A", 1.0, AttackPath(g.edges, 0.72))], g, rel)
    for fn in (solve_exact, solve_greedy, solve_partial_enum):
        assert fn(b, cat, g).portfolio == ("b",)


def test_zero_budget_buys_nothing():
    inst = small_instance(2)
    cat = ControlCatalog(inst.catalog.controls, 0.0)
    rep = solve_exact(ara_beliefs(inst), cat, inst.graph)
    assert rep.portfolio == () and rep.cost == 0


def test_ties_prefer_fewer_then_lexicographic():
    g = AttackGraph(3, ((1, 2), (2, 3)))
    rel = ReliabilityTable.shared(("A",), [0.5, 0.5], [0.25, 0.5])
    c = frozenset({(1, 2)})
    cat = ControlCatalog((Control("x", 1.0, frozenset({(2, 3)})), Control("y", 1.0, c),
                          Control("z", 1.0, c)), 2.0)
    b = DefenderBeliefs.from_paths([("A", 1.0, AttackPath(g.edges, 0.25))], g, rel)
    for fn in (solve_exact, solve_greedy, solve_partial_enum):
        assert fn(b, cat, g).portfolio == ("y",)


@pytest.mark.parametrize("seed", range(30))
def test_exact_matches_exhaustive(seed):
    inst = small_instance(1000 + seed)
    beliefs = ara_beliefs(inst)
    best_s, _ = exhaustive_best(beliefs, inst)
    rep = solve_exact(beliefs, inst.catalog, inst.graph)
    assert rep.attack_success == pytest.approx(best_s, abs=1e-10)
    assert rep.cost <= inst.catalog.budget + 1e-12
    g = solve_greedy(beliefs, inst.catalog, inst.graph)
    p = solve_partial_enum(beliefs, inst.catalog, inst.graph)
    assert g.value >= GUARANTEES["greedy"] * rep.value
    assert p.value >= GUARANTEES["partial_enum"] * rep.value
    assert p.value >= g.value - 1e-15
    assert rep.value >= max(g.value, p.value) - 1e-12


def test_exact_node_guard():
    inst = generate(case_study_spec(5))
    with pytest.raises(SearchLimitExceeded):
        solve_exact(ara_beliefs(inst, K=6), inst.catalog, inst.graph, node_limit=2)


def test_partial_enum_guard():
    inst = small_instance(6)
    with pytest.raises(SearchLimitExceeded):
        solve_partial_enum(ara_beliefs(inst), inst.catalog, inst.graph, max_triples=0)


def test_report_fields():
    inst = small_instance(8)
    rep = solve_exact(ara_beliefs(inst), inst.catalog, inst.graph)
    d = rep.as_dict()
    assert d["method"] == "exact" and d["guarantee"] == 1.0
    assert d["value"] + d["attack_success"] == pytest.approx(1.0)
    assert rep.candidates_evaluated > 0
