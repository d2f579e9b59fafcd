from .solver import (
    NO_FRONT,
    Grid1D,
    SolverConfig,
    conserved_totals,
    front_position,
    solve_euler,
    solve_psystem,
)

__all__ = [
    "NO_FRONT",
    "Grid1D",
    "SolverConfig",
    "conserved_totals",
    "front_position",
    "solve_euler",
    "solve_psystem",
]
