"""Team routing and scheduling under uncertain qualification demand.

Build deterministic and robust MILP plans for multi-skilled technician
teams, stress them with randomized demand scenarios, and reproduce the
full simulation study from the command line or as a library.
"""

from .adversary import (
    BufferTable,
    adversary_bruteforce,
    adversary_dp,
    adversary_milp,
    compute_buffers,
    longest_path_value,
)
from .experiments import (
    MetricsReport,
    ScenarioRecord,
    SolveRecord,
    StudyConfig,
    SweepRecord,
    SweepResult,
    derive_seed,
    run_study,
    run_sweep,
    solve_and_decode,
    write_scenario_csv,
    write_simulation_csv,
    write_solve_csv,
    write_sweep_csv,
)
from .figures import plot_study, plot_sweep
from .instance import (
    GenerationConfig,
    Instance,
    UncertaintySpec,
    ValidationError,
    generate_instance,
    generate_uncertainty,
    load_instance,
    load_uncertainty,
    save_instance,
    save_uncertainty,
)
from .milp import (
    Constraint,
    MilpModel,
    ModelError,
    SolveResult,
    SolverCrashError,
    SolverError,
    SolverNotFoundError,
    SolutionVerificationError,
    Variable,
    check_assignment,
    emit_lp_file,
    parse_lp_file,
    solve,
)
from .models import (
    DEFAULT_WEIGHTS,
    Solution,
    SolutionError,
    Weights,
    build_dm,
    build_model,
    build_rm1,
    build_rm2,
    decode_solution,
    load_solution,
    save_solution,
    verify_solution,
    worst_case_demand,
    worst_case_demands,
)
from .oracle import exhaustive_solve
from .scenario import Scenario, evaluate_scenario, gen_scenario_rm1, gen_scenario_rm2

__version__ = "0.1.0"

__all__ = [
    "BufferTable",
    "Constraint",
    "DEFAULT_WEIGHTS",
    "GenerationConfig",
    "Instance",
    "MetricsReport",
    "MilpModel",
    "ModelError",
    "Scenario",
    "ScenarioRecord",
    "Solution",
    "SolutionError",
    "SolutionVerificationError",
    "SolveRecord",
    "SolveResult",
    "SolverCrashError",
    "SolverError",
    "SolverNotFoundError",
    "StudyConfig",
    "SweepRecord",
    "SweepResult",
    "UncertaintySpec",
    "ValidationError",
    "Variable",
    "Weights",
    "adversary_bruteforce",
    "adversary_dp",
    "adversary_milp",
    "build_dm",
    "build_model",
    "build_rm1",
    "build_rm2",
    "check_assignment",
    "compute_buffers",
    "decode_solution",
    "derive_seed",
    "emit_lp_file",
    "evaluate_scenario",
    "exhaustive_solve",
    "gen_scenario_rm1",
    "gen_scenario_rm2",
    "generate_instance",
    "generate_uncertainty",
    "load_instance",
    "load_solution",
    "load_uncertainty",
    "longest_path_value",
    "parse_lp_file",
    "plot_study",
    "plot_sweep",
    "run_study",
    "run_sweep",
    "save_instance",
    "save_solution",
    "save_uncertainty",
    "solve",
    "solve_and_decode",
    "verify_solution",
    "worst_case_demand",
    "worst_case_demands",
    "write_scenario_csv",
    "write_simulation_csv",
    "write_solve_csv",
    "write_sweep_csv",
]
