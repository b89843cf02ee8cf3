"""Max-min policy program: formulation, dense simplex, duals and checks."""
from .kkt import KktCheck, KktReport, kkt_verify
from .oracle import OracleResult, grid_oracle
from .problem import (
    EPS_R,
    EPS_STRICT,
    LEMMA1_MESSAGE,
    DualSolution,
    LpProblem,
    LpSolution,
    RowKind,
    build_lp,
    optimize,
    solve,
    solve_dual,
    solve_primal,
    theorem2_value,
)
from .simplex import SimplexResult, simplex

__all__ = [
    "EPS_R",
    "EPS_STRICT",
    "LEMMA1_MESSAGE",
    "DualSolution",
    "KktCheck",
    "KktReport",
    "LpProblem",
    "LpSolution",
    "OracleResult",
    "RowKind",
    "SimplexResult",
    "build_lp",
    "grid_oracle",
    "kkt_verify",
    "optimize",
    "simplex",
    "solve",
    "solve_dual",
    "solve_primal",
    "theorem2_value",
]
