"""Newton and Jacobian-free Newton-Krylov nonlinear solvers."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import SolveError
from .gmres import gmres_solve

log = logging.getLogger(__name__)

MODES = ("NEWTON", "JFNK")
PRECONDITIONERS = ("default", "lu", "jacobi", "none")


@dataclass
class SolverOptions:
    mode: str = "NEWTON"
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    max_nonlinear_its: int = 25
    gmres_restart: int = 30
    gmres_rtol: float = 1e-6
    gmres_max_its: int = 300
    line_search: str = "none"
    preconditioner: str = "default"
    jfnk_epsilon: float | None = None  # fixed differencing step; None uses the sqrt(eps) rule

    def __post_init__(self):
        self.mode = self.mode.upper()
        if self.mode not in MODES:
            raise SolveError(f"unknown solve mode {self.mode!r}")
        if self.line_search not in ("none", "backtracking"):
            raise SolveError(f"unknown line search {self.line_search!r}")
        if self.preconditioner not in PRECONDITIONERS:
            raise SolveError(f"unknown preconditioner {self.preconditioner!r}")
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.gmres_rtol > 0):
            raise SolveError("tolerances must be positive")

    @property
    def effective_preconditioner(self) -> str:
        if self.preconditioner != "default":
            return self.preconditioner
        return "lu" if self.mode == "NEWTON" else "jacobi"


@dataclass
class SolveReport:
    converged: bool = False
    nonlinear_its: int = 0
    linear_its: int = 0
    initial_norm: float = 0.0
    final_norm: float = 0.0
    residual_norms: list[float] = field(default_factory=list)
    message: str = ""
    retries: int = 0
    dt: float | None = None


def _preconditioner(kind, J):
    if kind == "none" or J is None:
        return None
    if kind == "jacobi":
        d = np.asarray(J.diagonal() if sp.issparse(J) else np.diag(J), dtype=float)
        inv = np.where(d != 0.0, 1.0 / np.where(d != 0.0, d, 1.0), 1.0)
        return lambda v: inv * v
    if sp.issparse(J):
        lu = spla.splu(sp.csc_matrix(J))
        return lu.solve
    factors = sla.lu_factor(np.asarray(J, dtype=float))
    return lambda v: sla.lu_solve(factors, v)


def newton_solve(system, u0, opts: SolverOptions | None = None):
    """Solve ``R(u) = 0``.

    ``system`` provides ``residual(u)`` and ``jacobian(u)`` (AD-exact, dense or
    sparse). In JFNK mode the Jacobian is only used to build the
    preconditioner; its action is approximated by differencing residuals.
    """
    opts = opts or SolverOptions()
    u = np.array(u0, dtype=float)
    report = SolveReport()
    R = system.residual(u)
    norm = float(np.linalg.norm(R))
    report.initial_norm = report.final_norm = norm
    report.residual_norms.append(norm)
    if not np.isfinite(norm):
        report.message = "non-finite residual"
        return u, report
    target = max(opts.abs_tol, opts.rel_tol * norm)
    eps_mach = np.finfo(float).eps
    pc_kind = opts.effective_preconditioner

    while True:
        if norm <= target:
            report.converged = True
            report.message = "converged"
            break
        if report.nonlinear_its >= opts.max_nonlinear_its:
            report.message = "maximum nonlinear iterations reached"
            break
        needs_J = opts.mode == "NEWTON" or pc_kind != "none"
        J = system.jacobian(u) if needs_J else None
        if J is not None and not np.all(np.isfinite(J.data if sp.issparse(J) else J)):
            report.message = "linear solve failure: non-finite Jacobian"
            break
        try:
            M = _preconditioner(pc_kind, J)
        except (RuntimeError, ValueError, sla.LinAlgError) as exc:
            report.message = f"linear solve failure: {exc}"
            break
        if opts.mode == "NEWTON":
            apply_A = (lambda v, J=J: J @ v)
        else:
            unorm = float(np.linalg.norm(u))

            def apply_A(v, u=u, R=R, unorm=unorm):
                vnorm = float(np.linalg.norm(v))
                if vnorm == 0.0:
                    return np.zeros_like(v)
                eps = opts.jfnk_epsilon or np.sqrt(eps_mach) * (1.0 + unorm) / vnorm
                return (system.residual(u + eps * v) - R) / eps

        try:
            delta, st = gmres_solve(
                apply_A, -R, M, restart=opts.gmres_restart, rtol=opts.gmres_rtol, max_its=opts.gmres_max_its
            )
        except (RuntimeError, ValueError, sla.LinAlgError) as exc:
            report.message = f"linear solve failure: {exc}"
            break
        report.linear_its += st.iterations
        if not np.all(np.isfinite(delta)):
            report.message = "linear solve failure: non-finite update"
            break
        lam = 1.0
        u_new = u + delta
        R_new = system.residual(u_new)
        norm_new = float(np.linalg.norm(R_new))
        if opts.line_search == "backtracking":
            for _ in range(8):
                if np.isfinite(norm_new) and norm_new < norm:
                    break
                lam *= 0.5
                u_new = u + lam * delta
                R_new = system.residual(u_new)
                norm_new = float(np.linalg.norm(R_new))
        u, R, norm = u_new, R_new, norm_new
        report.nonlinear_its += 1
        report.residual_norms.append(norm)
        report.final_norm = norm
        log.debug("  nl it %d |R| = %.6e (linear its %d)", report.nonlinear_its, norm, st.iterations)
        if not np.isfinite(norm):
            report.message = "non-finite residual"
            break
    report.final_norm = norm
    return u, report


class ProblemSystem:
    """Adapter exposing an :class:`FEProblem` at a fixed time state to the solvers."""

    def __init__(self, problem, state, nworkers=1):
        from ..fem.assembly import assemble

        self._assemble = assemble
        self.problem = problem
        self.state = state
        self.nworkers = nworkers

    def residual(self, u):
        return self._assemble(self.problem, u, self.state, jacobian=False, nworkers=self.nworkers)[0]

    def jacobian(self, u):
        return self._assemble(self.problem, u, self.state, jacobian=True, nworkers=self.nworkers)[1]
