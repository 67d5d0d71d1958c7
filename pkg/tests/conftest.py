import itertools

import numpy as np
import pytest

from ara_interdiction.ara import AraConfig, build_beliefs, run_ara, uniform_levels
from ara_interdiction.generator import GenSpec, generate
from ara_interdiction.objective import path_reliability_g
from ara_interdiction.graph import covered_edges

# Acceptance outcomes, filled by tests/test_acceptance.py: (criterion, status, detail).
ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{status:<9} {name}: {detail}")


def small_instance(seed: int, knapsack: bool | None = None, max_controls: int = 10,
                   controls: int | None = None):
    """Seeded small layered instance with varied shape."""
    rng = np.random.default_rng(seed)
    kind = knapsack if knapsack is not None else bool(rng.integers(2))
    M = int(rng.integers(3, max_controls + 1))
    if controls is not None:
        M = controls
    spec = GenSpec(
        layers=int(rng.integers(1, 6)), nodes_per_layer=int(rng.integers(1, 6)),
        num_controls=M, budget=float(rng.integers(1, M + 1)) if not kind else float(rng.uniform(1, M / 2)),
        budget_kind="knapsack" if kind else "cardinality",
        alpha=float(rng.uniform(0.1, 0.5)), alpha2=float(rng.uniform(0, 1)) if kind else 0.0,
        seed=seed, attacker_types=int(rng.integers(1, 3)),
        out_degree=int(rng.integers(1, 4)),
    )
    return generate(spec)


def ara_beliefs(inst, K: int = 4, solver: str = "greedy"):
    """Beliefs of a level-K defender built from an ARA run."""
    res = run_ara(inst, AraConfig(K=K, solver=solver))
    return build_beliefs(uniform_levels(0, K - 1), res.paths, inst)


def oracle_success(portfolio, beliefs, inst) -> float:
    """Weighted sum of path products, one belief at a time."""
    S = covered_edges(portfolio, inst.catalog)
    return sum(b.weight * path_reliability_g(S, b.path, b.attacker, inst.reliabilities, inst.graph)
               for b in beliefs.entries)


def exhaustive_best(beliefs, inst):
    """Minimum success over every budget-feasible subset."""
    ids = inst.catalog.ids
    best = (oracle_success((), beliefs, inst), ())
    for r in range(1, len(ids) + 1):
        for sub in itertools.combinations(ids, r):
            if inst.catalog.cost_of(sub) <= inst.catalog.budget + 1e-12:
                s = oracle_success(sub, beliefs, inst)
                if s < best[0]:
                    best = (s, sub)
    return best


@pytest.fixture
def fixture_instance():
    from ara_interdiction.io import example_instance
    return example_instance()
