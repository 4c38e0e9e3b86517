"""pamlab: a simulation laboratory for a lattice reactant field u driven by
an interacting-particle-system catalyst xi on a periodic torus,

    du/dt = kappa * Lap(u) + gamma * xi * u,

with event-driven catalyst dynamics (independent walks, stirring exclusion,
voter), two mutually validating solvers for u, growth-rate estimators, and
exact-oracle statistics.
"""

from .environment import (
    EnvKind,
    EnvState,
    EnvTrajectory,
    env_evolve,
    env_init,
    env_integral,
    load_trajectory,
    save_trajectory,
)
from .lattice import (
    Field,
    GreenFunctionValue,
    Params,
    Torus,
    WalkPath,
    green_function_origin,
    heat_kernel,
    heat_kernel_origin_values,
    laplacian_apply,
    laplacian_matrix,
    rw_sample_path,
)
from .lyapunov import (
    LyapunovEstimate,
    SweepResult,
    annealed_lambda,
    kappa_sweep,
    quenched_lambda,
)
from .rng import RngStream
from .solver import (
    FkEstimate,
    InitialCondition,
    ScaledField,
    SolveReport,
    SolverError,
    log_partition_function,
    partition_function,
    solve_direct,
    solve_feynman_kac,
)
from .stats import (
    CorrelationCheck,
    Estimate,
    LdpCheck,
    correlation_empirical,
    correlation_empirical_many,
    correlation_exact,
    ldp_empirical_check,
    noisiness_e1,
    noisiness_e2_e4,
    noisiness_e2_oracle,
    poisson_rate,
)

__version__ = "0.1.0"

__all__ = [
    "EnvKind", "EnvState", "EnvTrajectory", "env_evolve", "env_init",
    "env_integral", "load_trajectory", "save_trajectory",
    "Field", "GreenFunctionValue", "Params", "Torus", "WalkPath",
    "green_function_origin", "heat_kernel", "heat_kernel_origin_values",
    "laplacian_apply", "laplacian_matrix", "rw_sample_path",
    "LyapunovEstimate", "SweepResult", "annealed_lambda", "kappa_sweep",
    "quenched_lambda",
    "RngStream",
    "FkEstimate", "InitialCondition", "ScaledField", "SolveReport",
    "SolverError", "log_partition_function", "partition_function",
    "solve_direct", "solve_feynman_kac",
    "CorrelationCheck", "Estimate", "LdpCheck", "correlation_empirical",
    "correlation_empirical_many", "correlation_exact", "ldp_empirical_check",
    "noisiness_e1", "noisiness_e2_e4", "noisiness_e2_oracle", "poisson_rate",
]
