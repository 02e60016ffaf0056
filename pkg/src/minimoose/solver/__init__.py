from .gmres import GMRESStats, gmres_solve
from .newton import ProblemSystem, SolveReport, SolverOptions, newton_solve
from .state import TimeState
from .transient import implicit_euler_step, steady_state_check

__all__ = [
    "GMRESStats",
    "ProblemSystem",
    "SolveReport",
    "SolverOptions",
    "TimeState",
    "gmres_solve",
    "implicit_euler_step",
    "newton_solve",
    "steady_state_check",
]
