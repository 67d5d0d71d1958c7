"""Iterative level-k adversarial risk analysis.

Level 0 attackers walk myopically and the level 0 defender buys nothing. For
``k = 1 .. K-1`` each level-k attacker best-responds to the level-(k-1)
portfolio, and the level-k defender best-responds to a mixture over attacker
levels ``0 .. k-1``. A final level-K defender solve closes the loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .attacker import AttackPath, level0_path, solve_opt_att
from .defender import SolveReport, solve
from .graph import (
    AttackerPopulation,
    AttackGraph,
    ControlCatalog,
    Instance,
    ReliabilityTable,
    covered_edges,
    perceived_reliabilities,
)
from .objective import DefenderBeliefs, path_reliability_g

LevelWeights = Mapping[int, float]


def uniform_levels(lo: int, hi: int) -> dict[int, float]:
    """Uniform weights over the inclusive level range ``lo..hi``."""
    if hi < lo:
        raise ValueError(f"empty level range {lo}..{hi}")
    n = hi - lo + 1
    return {lv: 1.0 / n for lv in range(lo, hi + 1)}


def _check_distribution(dist: LevelWeights, what: str) -> None:
    if any(w < 0 for w in dist.values()):
        raise ValueError(f"{what}: negative weight")
    if abs(math.fsum(dist.values()) - 1.0) > 1e-12:
        raise ValueError(f"{what}: weights sum to {math.fsum(dist.values())!r}")


@dataclass(frozen=True)
class AraConfig:
    """Settings for one ARA run.

    ``attacker_level_distribution`` maps a defender level ``k`` to its believed
    weights over attacker levels (default: uniform over ``0..k-1``).
    ``actual_attacker_levels`` are the true level weights used for
    retrospective evaluation (default: uniform over ``0..K-1``). A non-zero
    ``offset`` makes the level-K defender perceive every true level ``l`` as
    ``clamp(l + offset, 0, K-1)``.
    """

    K: int
    attacker_level_distribution: Callable[[int], LevelWeights] | Mapping[int, LevelWeights] | None = None
    actual_attacker_levels: LevelWeights | None = None
    offset: int = 0
    solver: str = "exact"
    seed: int = 0
    node_limit: int = 10**7

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if abs(self.offset) > self.K - 1:
            raise ValueError(f"offset {self.offset} outside [-(K-1), K-1]")
        if self.actual_attacker_levels is not None:
            _check_distribution(self.actual_attacker_levels, "actual_attacker_levels")

    def believed_levels(self, k: int) -> dict[int, float]:
        dist = self.attacker_level_distribution
        if dist is None:
            out = uniform_levels(0, k - 1)
        elif callable(dist):
            out = dict(dist(k))
        else:
            out = dict(dist[k]) if k in dist else uniform_levels(0, k - 1)
        _check_distribution(out, f"defender level {k} beliefs")
        if any(lv >= k or lv < 0 for lv, w in out.items() if w > 0):
            raise ValueError(f"defender level {k} may only believe in attacker levels 0..{k - 1}")
        return out

    def actual_levels(self) -> dict[int, float]:
        if self.actual_attacker_levels is None:
            return uniform_levels(0, self.K - 1)
        return dict(self.actual_attacker_levels)


@dataclass(frozen=True)
class DefenderLevel:
    level: int
    portfolio: tuple[str, ...]
    believed_success: float
    believed_levels: dict[int, float] = field(default_factory=dict)
    report: SolveReport | None = None


@dataclass(frozen=True)
class AraResult:
    config: AraConfig
    defenders: tuple[DefenderLevel, ...]
    paths: dict[int, dict[str, AttackPath]]
    believed_curve: tuple[float, ...]
    actual_curve: tuple[float, ...]

    def portfolio(self, level: int) -> tuple[str, ...]:
        return self.defenders[level].portfolio

    def path(self, level: int, attacker: str) -> AttackPath:
        return self.paths[level][attacker]

    def curves(self) -> list[tuple[int, float, float]]:
        return [(k, b, a) for k, (b, a) in enumerate(zip(self.believed_curve, self.actual_curve))]


def build_beliefs(
    level_weights: LevelWeights,
    paths: Mapping[int, Mapping[str, AttackPath]],
    inst: Instance,
) -> DefenderBeliefs:
    """Fold type weights and level weights into one belief mixture."""
    items = []
    for lv in sorted(level_weights):
        w_lv = level_weights[lv]
        if w_lv == 0:
            continue
        for a, theta in inst.population.items():
            if theta == 0:
                continue
            items.append((a, w_lv * theta, paths[lv][a], lv))
    return DefenderBeliefs.from_paths(items, inst.graph, inst.reliabilities)


def perceived_distribution(actual: LevelWeights, offset: int, K: int) -> dict[int, float]:
    """Map each true level ``l`` to ``clamp(l + offset, 0, K-1)``, summing weights."""
    out: dict[int, float] = {}
    for lv in sorted(actual):
        p = min(max(lv + offset, 0), K - 1)
        out[p] = out.get(p, 0.0) + actual[lv]
    return out


def actual_attack_success(
    portfolio: Iterable[str],
    actual_levels: LevelWeights,
    ara_paths: Mapping[int, Mapping[str, AttackPath]],
    rel: ReliabilityTable,
    cat: ControlCatalog,
    graph: AttackGraph,
    population: AttackerPopulation,
) -> float:
    """Retrospective success: true-level-weighted path products under ``portfolio``."""
    S = covered_edges(portfolio, cat)
    total = 0.0
    for a, theta in population.items():
        for lv in sorted(actual_levels):
            w = actual_levels[lv]
            if w == 0 or theta == 0:
                continue
            total += theta * w * path_reliability_g(S, ara_paths[lv][a], a, rel, graph)
    return total


def _defend(inst: Instance, cfg: AraConfig, level: int, dist: dict[int, float],
            paths: Mapping[int, Mapping[str, AttackPath]]) -> DefenderLevel:
    beliefs = build_beliefs(dist, paths, inst)
    kwargs = {"node_limit": cfg.node_limit} if cfg.solver == "exact" else {}
    rep = solve(cfg.solver, beliefs, inst.catalog, inst.graph, **kwargs)
    return DefenderLevel(level, rep.portfolio, rep.attack_success, dist, rep)


def attacker_response(inst: Instance, portfolio: Iterable[str], attacker: str) -> AttackPath:
    return solve_opt_att(inst.graph, perceived_reliabilities(portfolio, attacker, inst))


def run_ara(inst: Instance, config: AraConfig) -> AraResult:
    """Run levels ``0..K`` and record every portfolio, path and curve value."""
    K = config.K
    attackers = inst.population.attackers
    paths: dict[int, dict[str, AttackPath]] = {
        0: {a: level0_path(inst.graph, inst.reliabilities, a, [config.seed, 0, r])
            for r, a in enumerate(attackers)}
    }
    defenders = [DefenderLevel(0, (), math.nan)]
    for k in range(1, K):
        prev = defenders[k - 1].portfolio
        paths[k] = {a: attacker_response(inst, prev, a) for a in attackers}
        defenders.append(_defend(inst, config, k, config.believed_levels(k), paths))

    actual = config.actual_levels()
    if config.offset:
        final_dist = perceived_distribution(actual, config.offset, K)
    else:
        final_dist = config.believed_levels(K)
    defenders.append(_defend(inst, config, K, final_dist, paths))

    # True levels beyond the modelled range best-respond to the level-(K-1) portfolio.
    ceiling = defenders[K - 1].portfolio
    extra = {lv: {a: attacker_response(inst, ceiling, a) for a in attackers}
             for lv in actual if lv > K - 1}
    all_paths = {**paths, **extra}

    believed = tuple(d.believed_success for d in defenders)
    actual_curve = tuple(
        actual_attack_success(d.portfolio, actual, all_paths, inst.reliabilities,
                              inst.catalog, inst.graph, inst.population)
        for d in defenders
    )
    return AraResult(config, tuple(defenders), all_paths, believed, actual_curve)


@dataclass(frozen=True)
class OffsetRow:
    offset: int
    perceived_levels: dict[int, float]
    portfolio: tuple[str, ...]
    believed_success: float
    actual_success: float


def run_offset_experiment(
    inst: Instance,
    base_config: AraConfig,
    offsets: Iterable[int],
    base: AraResult | None = None,
) -> list[OffsetRow]:
    """Re-solve the level-K defender under uniformly shifted level beliefs.

    Attacker paths come from the matched-beliefs run ``base`` (computed if not
    supplied); only the final defender solve changes with the offset.
    """
    K = base_config.K
    if base is None:
        base = run_ara(inst, base_config)
    actual = base_config.actual_levels()
    rows = []
    for off in offsets:
        if abs(off) > K - 1:
            raise ValueError(f"offset {off} outside [-(K-1), K-1]")
        dist = perceived_distribution(actual, off, K)
        d = _defend(inst, base_config, K, dist, base.paths)
        act = actual_attack_success(d.portfolio, actual, base.paths, inst.reliabilities,
                                    inst.catalog, inst.graph, inst.population)
        rows.append(OffsetRow(off, dist, d.portfolio, d.believed_success, act))
    return rows
