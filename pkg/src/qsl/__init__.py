"""Quantum speed limits for isolated and closed systems.

Evaluates the Mandelstam-Tamm, Margolus-Levitin, and Bhatia-Davies bounds
against measured first-passage times, and constructs closed systems that
defeat a hypothetical closed-system Margolus-Levitin bound and that saturate
Mandelstam-Tamm without saturating Bhatia-Davies.
"""

from .bounds import (
    BoundReport,
    alpha,
    alpha_grid_oracle,
    bd_closed,
    bd_isolated,
    evaluate_bounds,
    first_passage,
    ml_isolated,
    mt_closed,
    mt_isolated,
    time_average,
)
from .counterexamples import (
    RefutationReport,
    RefutationSpec,
    bd_pointwise_margin,
    build_coupling,
    build_ml_family,
    choose_theta,
    run_bd_nonsaturation,
    run_ml_refutation,
)
from .errors import (
    ConfigError,
    DegenerateInterval,
    DimensionMismatch,
    DomainError,
    InsufficientLevels,
    NoOccupation,
    NonHermitian,
    NotReached,
    QslError,
    StepTooLarge,
)
from .evolution import (
    RotatedHamiltonianSystem,
    Trajectory,
    bloch_operators,
    propagate_exact,
    propagate_numeric,
    rotating_frame,
    sample_trajectory,
)
from .linalg import (
    HermitianOperator,
    OccupiedExtrema,
    PureState,
    commutator_norm,
    eigh,
    expectation,
    fidelity,
    level_occupations,
    occupied_extrema,
    trace_distance,
    unitary_exp,
    variance,
)
from .sweeps import (
    SweepRow,
    random_coupled_system,
    random_hermitian,
    random_isolated_system,
    random_pure_state,
    random_saturating_two_level,
    validity_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "ConfigError",
    "DegenerateInterval",
    "DimensionMismatch",
    "DomainError",
    "HermitianOperator",
    "InsufficientLevels",
    "NoOccupation",
    "NonHermitian",
    "NotReached",
    "OccupiedExtrema",
    "PureState",
    "QslError",
    "RefutationReport",
    "RefutationSpec",
    "RotatedHamiltonianSystem",
    "StepTooLarge",
    "SweepRow",
    "Trajectory",
    "alpha",
    "alpha_grid_oracle",
    "bd_closed",
    "bd_isolated",
    "bd_pointwise_margin",
    "bloch_operators",
    "build_coupling",
    "build_ml_family",
    "choose_theta",
    "commutator_norm",
    "eigh",
    "evaluate_bounds",
    "expectation",
    "fidelity",
    "first_passage",
    "level_occupations",
    "ml_isolated",
    "mt_closed",
    "mt_isolated",
    "occupied_extrema",
    "propagate_exact",
    "propagate_numeric",
    "random_coupled_system",
    "random_hermitian",
    "random_isolated_system",
    "random_pure_state",
    "random_saturating_two_level",
    "rotating_frame",
    "run_bd_nonsaturation",
    "run_ml_refutation",
    "sample_trajectory",
    "time_average",
    "trace_distance",
    "unitary_exp",
    "validity_sweep",
    "variance",
]
