"""Maximum entropy reconstruction of discrete distributions from raw moments."""

from .dual import (
    LagrangeMultipliers,
    SolverConfig,
    SolverDiverged,
    SolverReport,
    distribution_from,
    evaluate_dual,
    gradient,
    hessian,
    minimize,
)
from .moments import (
    FiniteDistribution,
    MomentError,
    MomentSequence,
    SupportWindow,
    entropy,
    moments_of,
    total_variation,
    validate_moments,
)
from .reconstruction import ReconstructionResult, WindowCapReached, reconstruct
from .support import SupportConfig, initial_window, tail_ok

__version__ = "0.1.0"

__all__ = [
    "FiniteDistribution",
    "LagrangeMultipliers",
    "MomentError",
    "MomentSequence",
    "ReconstructionResult",
    "SolverConfig",
    "SolverDiverged",
    "SolverReport",
    "SupportConfig",
    "SupportWindow",
    "WindowCapReached",
    "distribution_from",
    "entropy",
    "evaluate_dual",
    "gradient",
    "hessian",
    "initial_window",
    "minimize",
    "moments_of",
    "reconstruct",
    "tail_ok",
    "total_variation",
    "validate_moments",
]
