"""Leader-follower equilibrium solvers for polymatrix games."""

from .apx_solver import ApxReport, solve_plfe_apx
from .bayesian_bridge import (
    BayesianGame,
    FollowerType,
    bg_to_polymatrix,
    polymatrix_to_bg,
)
from .game_model import (
    GameClass,
    GameClassError,
    MixedStrategy,
    PolymatrixGame,
    ValidationReport,
    best_response_set,
    enumerate_pure_ne,
    evaluate_commitment,
    validate,
)
from .olfe_solver import NoPureCommitmentError, solve_olfe
from .oracles import Graph, grid_oracle, max_clique_bruteforce, supremum_1d
from .plfe_exact import LfeResult, SolverFailure, solve_plfe

__version__ = "0.1.0"

__all__ = [
    "ApxReport",
    "BayesianGame",
    "FollowerType",
    "GameClass",
    "GameClassError",
    "Graph",
    "LfeResult",
    "MixedStrategy",
    "NoPureCommitmentError",
    "PolymatrixGame",
    "SolverFailure",
    "ValidationReport",
    "best_response_set",
    "bg_to_polymatrix",
    "enumerate_pure_ne",
    "evaluate_commitment",
    "grid_oracle",
    "max_clique_bruteforce",
    "polymatrix_to_bg",
    "solve_olfe",
    "solve_plfe",
    "solve_plfe_apx",
    "supremum_1d",
    "validate",
]
