"""Level-k adversarial risk analysis for attack-graph interdiction."""

from .ara import AraConfig, AraResult, run_ara, run_offset_experiment, uniform_levels
from .attacker import AttackPath, NoPathError, brute_force_best_path, level0_path, solve_opt_att
from .defender import SearchLimitExceeded, SolveReport, solve, solve_exact, solve_greedy, solve_partial_enum
from .generator import GenSpec, case_study_spec, generate
from .graph import (
    AttackerPopulation,
    AttackGraph,
    Control,
    ControlCatalog,
    Instance,
    InstanceError,
    ReliabilityTable,
    UnknownControlError,
    validate,
)
from .io import example_instance, load_instance, save_instance
from .objective import DefenderBeliefs, DefenderObjective, attack_success, f_prevented

__version__ = "0.1.0"

__all__ = [
    "AraConfig", "AraResult", "AttackGraph", "AttackPath", "AttackerPopulation", "Control",
    "ControlCatalog", "DefenderBeliefs", "DefenderObjective", "GenSpec", "Instance",
    "InstanceError", "NoPathError", "ReliabilityTable", "SearchLimitExceeded", "SolveReport",
    "UnknownControlError", "attack_success", "brute_force_best_path", "case_study_spec",
    "example_instance", "f_prevented", "generate", "level0_path", "load_instance", "run_ara",
    "run_offset_experiment", "save_instance", "solve", "solve_exact", "solve_greedy",
    "solve_opt_att", "solve_partial_enum", "uniform_levels", "validate",
]
