"""Global solutions and optimality certificates for scalar quadratically constrained quadratic programs."""

__version__ = "0.1.0"

from .dual import DualEvaluation, DualStatus, Solution, SolveConfig, dual_value, find_slater_point, solve
from .errors import (
    AllZeroMultipliers,
    DegenerateInput,
    DimensionError,
    DualDivergence,
    FullRank,
    GridTooLarge,
    InternalContradiction,
    NegativeMultiplier,
    NoConvergence,
    NonFiniteEntry,
    ParseError,
    QCQPError,
    ValidationError,
)
from .gis import SampleConfig, WitnessResult, convexity_witness, kernel_vector, linear_rank, sample_image
from .kkt import CheckReport, MatrixQuadratic, check_fritz_john, check_kkt, check_kkt_general
from .model import (
    Certificate,
    Multipliers,
    Problem,
    ScalarQuadratic,
    ToleranceSet,
    Verdict,
    aggregate,
    combine,
    evaluate,
    gradient,
    infimum,
    shift_objective,
)
from .oracle import GridOptimum, GridSpec, grid_minimize, grid_refute_nonneg
from .search import SearchConfig
from .slemma import AlternativeVerdict, Outcome, alternative, nonnegativity_certificate

__all__ = [
    "aggregate",
    "AllZeroMultipliers",
    "alternative",
    "AlternativeVerdict",
    "Certificate",
    "check_fritz_john",
    "check_kkt",
    "check_kkt_general",
    "CheckReport",
    "combine",
    "convexity_witness",
    "DegenerateInput",
    "DimensionError",
    "dual_value",
    "DualDivergence",
    "DualEvaluation",
    "DualStatus",
    "evaluate",
    "find_slater_point",
    "FullRank",
    "gradient",
    "grid_minimize",
    "grid_refute_nonneg",
    "GridOptimum",
    "GridSpec",
    "GridTooLarge",
    "infimum",
    "InternalContradiction",
    "kernel_vector",
    "linear_rank",
    "MatrixQuadratic",
    "Multipliers",
    "NegativeMultiplier",
    "NoConvergence",
    "NonFiniteEntry",
    "nonnegativity_certificate",
    "Outcome",
    "ParseError",
    "Problem",
    "QCQPError",
    "sample_image",
    "SampleConfig",
    "ScalarQuadratic",
    "SearchConfig",
    "shift_objective",
    "Solution",
    "solve",
    "SolveConfig",
    "ToleranceSet",
    "ValidationError",
    "Verdict",
    "WitnessResult",
]
