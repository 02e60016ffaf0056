"""Scheduled execution of initial conditions, stateful data, aux kernels and postprocessors."""
from __future__ import annotations

import numpy as np

from ..errors import MooseError
from .materials import evaluate_materials
from .postprocessors import value_context

SCHEDULES = ("initial", "timestep_end", "final")


def apply_initial_conditions(problem) -> np.ndarray:
    u = np.zeros(problem.dofmap.n_dofs)
    for var in problem.variables:
        ic = problem.initial_conditions.get(var, 0.0)
        sl = problem.dofmap.var_slice(var)
        if isinstance(ic, str):
            u[sl] = problem.functions[ic].value(problem.time.t, problem.mesh.nodes)
        else:
            u[sl] = float(ic)
    problem.u = u
    return u


def _stateful_materials(problem):
    return [m for m in problem.material_order if m.stateful()]


def init_stateful(problem) -> None:
    if not _stateful_materials(problem):
        return
    ctx = value_context(problem, problem.volume, problem.u)
    for m in problem.material_order:
        if m.stateful():
            for p in m.stateful():
                problem.stateful.declare(p)
            m.initial_state(ctx)
        else:
            m.compute(ctx)
    for m in _stateful_materials(problem):
        for p in m.stateful():
            problem.stateful.set_old(p, ctx.prop(p).val)
            problem.stateful.set_current(p, ctx.prop(p).val)


def update_stateful(problem, u) -> None:
    """Store converged stateful property values as the step's current state."""
    if not _stateful_materials(problem):
        return
    ctx = value_context(problem, problem.volume, u)
    evaluate_materials(ctx, problem.material_order)
    for m in _stateful_materials(problem):
        for p in m.stateful():
            problem.stateful.set_current(p, ctx.prop(p).val)


def execute_aux_kernels(problem, when: str, u=None) -> None:
    if when not in SCHEDULES:
        raise MooseError(f"unknown schedule '{when}'")
    u = problem.u if u is None else u
    for ak in problem.aux_kernels:
        if when in ak.params["execute_on"]:
            problem.aux[ak.variable].values[...] = ak.compute(problem, u)


def execute_postprocessors(problem, when: str, u=None) -> dict[str, float]:
    """Run the postprocessors scheduled at ``when`` in declaration order."""
    if when not in SCHEDULES:
        raise MooseError(f"unknown schedule '{when}'")
    u = problem.u if u is None else u
    for name, pp in problem.postprocessors.items():
        if when in pp.execute_on:
            problem.pp_values[name] = float(pp.compute(problem, u))
    for name, vpp in problem.vector_postprocessors.items():
        if when in vpp.execute_on:
            problem.vpp_values[name] = {k: np.asarray(v, dtype=float) for k, v in vpp.compute(problem, u).items()}
    return dict(problem.pp_values)
