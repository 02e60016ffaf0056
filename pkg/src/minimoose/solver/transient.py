from __future__ import annotations

import logging

import numpy as np

from ..systems.execute import update_stateful
from .newton import ProblemSystem, SolverOptions, newton_solve
from .state import TimeState

log = logging.getLogger(__name__)

MAX_DT_HALVINGS = 4


def implicit_euler_step(problem, opts: SolverOptions, dt: float | None = None, nworkers: int = 1, t_target=None):
    """Advance ``problem`` by one backward-Euler step.

    A failed nonlinear solve halves ``dt`` and retries, at most four times.
    On final failure the problem is left at the start-of-step state and the
    returned report has ``converged == False``. ``t_target`` pins the end
    time of the first attempt exactly (used to land sub-cycled apps on the
    parent time).
    """
    start = problem.time
    if t_target is not None:
        dt = float(t_target) - start.t
    dt = start.dt if dt is None else float(dt)
    u_old = problem.u.copy()
    problem.stateful.swap()
    retries = 0
    while True:
        t_new = float(t_target) if (t_target is not None and retries == 0) else start.t + dt
        state = TimeState(t_new, dt, start.step + 1, u_old)
        problem.time = state
        u, report = newton_solve(ProblemSystem(problem, state, nworkers), u_old, opts)
        report.retries = retries
        report.dt = dt
        if report.converged:
            break
        if retries >= MAX_DT_HALVINGS:
            problem.time = start
            problem.u = u_old
            log.warning("step at t=%g failed after %d dt halvings: %s", start.t, retries, report.message)
            return u_old, report
        retries += 1
        dt *= 0.5
        log.info("nonlinear solve failed (%s); retrying with dt=%g", report.message, dt)
    problem.u = u
    update_stateful(problem, u)
    return u, report


def steady_state_check(u_new, u_old, dt, tol=1e-6, floor=1e-30) -> bool:
    """True when the relative rate of change ``||du|| / (dt ||u||)`` drops below ``tol``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    change = float(np.linalg.norm(np.asarray(u_new) - np.asarray(u_old)))
    return change / (dt * float(np.linalg.norm(u_new)) + floor) < tol
