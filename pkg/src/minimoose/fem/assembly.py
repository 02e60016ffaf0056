"""Residual and Jacobian assembly.

Elements are processed in fixed-size chunks. Each chunk yields element-local
residual vectors (and Jacobian blocks when requested); the global scatter
then runs serially in chunk order, so the result does not depend on how many
workers computed the chunks.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import _accel
from ..ad import Dual, DualVector
from ..systems.base import IntegratedBC, KernelGrad, KernelValue
from ..systems.materials import evaluate_materials
from .context import ElementContext
from .geometry import QpData

log = logging.getLogger(__name__)

CHUNK_SIZE = 256


def _as_dual(value, ctx) -> Dual:
    if isinstance(value, Dual):
        if value.shape != ctx.shape:
            return Dual(np.broadcast_to(value.val, ctx.shape), np.broadcast_to(value.der, ctx.shape + (value.n,)))
        return value
    return ctx.constant(value)


def _as_dual_vector(value, ctx) -> DualVector:
    if isinstance(value, DualVector):
        return value
    val = np.broadcast_to(np.asarray(value, dtype=float), ctx.shape + (ctx.x.shape[-1],))
    return DualVector(val, np.zeros(val.shape + (ctx.n_deriv,)))


def local_residual(obj, ctx) -> Dual:
    """Integrate one object's qp integrand against every test function of the batch."""
    JxW, phi, grad_phi = ctx.JxW, ctx.phi, ctx.grad_phi
    if isinstance(obj, (KernelValue, IntegratedBC)):
        f = _as_dual(obj.precompute_qp_residual(ctx), ctx)
        return Dual(
            np.einsum("eq,eq,eqa->ea", JxW, f.val, phi),
            np.einsum("eq,eql,eqa->eal", JxW, f.der, phi),
        )
    if isinstance(obj, KernelGrad):
        F = _as_dual_vector(obj.precompute_qp_residual(ctx), ctx)
        return Dual(
            np.einsum("eq,eqd,eqad->ea", JxW, F.val, grad_phi),
            np.einsum("eq,eqdl,eqad->eal", JxW, F.der, grad_phi),
        )
    vals, ders = [], []
    for a in range(ctx.nloc):
        f = _as_dual(obj.qp_residual(ctx, phi[..., a], grad_phi[..., a, :]), ctx)
        vals.append(np.einsum("eq,eq->e", JxW, f.val))
        ders.append(np.einsum("eq,eql->el", JxW, f.der))
    return Dual(np.stack(vals, axis=1), np.stack(ders, axis=1))


def _chunk_contrib(problem, qp: QpData, objects, u, state, derivatives, on_side):
    ctx = ElementContext(problem, qp, u, state, derivatives=derivatives, on_side=on_side)
    evaluate_materials(ctx, problem.material_order)
    nvar = len(problem.variables)
    ne, L = len(qp), ctx.nloc * nvar
    r = np.zeros((ne, nvar, ctx.nloc))
    K = np.zeros((ne, nvar, ctx.nloc, L)) if derivatives else None
    for obj in objects:
        vi = problem.dofmap.index(obj.variable)
        contrib = local_residual(obj, ctx)
        r[:, vi] += contrib.val
        if derivatives:
            K[:, vi] += contrib.der
    return qp.elements, r.reshape(ne, L), None if K is None else K.reshape(ne, L, L)


def _work_items(problem, elements=None):
    """Fixed-order list of (qp batch, objects, on_side) chunks."""
    items = []
    vol = problem.volume
    if elements is not None:
        keep = np.zeros(problem.mesh.n_elements, dtype=bool)
        keep[np.asarray(elements, dtype=np.int64)] = True
    if problem.kernels:
        data = vol if elements is None else vol.take(np.nonzero(keep)[0])
        for s in range(0, len(data), CHUNK_SIZE):
            items.append((data.chunk(s, s + CHUNK_SIZE), problem.kernels, False))
    for bc in problem.integrated_bcs:
        for b in bc.boundaries:
            data = problem.side_data(b)
            if elements is not None:
                data = data.take(keep[data.elements])
            for s in range(0, len(data), CHUNK_SIZE):
                items.append((data.chunk(s, s + CHUNK_SIZE), [bc], True))
    return items


def _first_bad_element(elements, r):
    bad = ~np.isfinite(r).all(axis=1)
    return int(elements[np.argmax(bad)]) if bad.any() else None


def assemble(problem, u, state=None, jacobian=True, nworkers=1, elements=None, dirichlet=True, use_numba=None):
    """Global residual and (optionally) CSR Jacobian at ``u``.

    ``elements`` restricts volume and side integration to a subset (used
    for per-part assembly); ``dirichlet=False`` leaves constrained rows as
    plain integrals.
    """
    state = problem.time if state is None else state
    u = np.asarray(u, dtype=float)
    items = _work_items(problem, elements)

    def run(item):
        qp, objs, on_side = item
        return _chunk_contrib(problem, qp, objs, u, state, jacobian, on_side)

    if nworkers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            results = list(pool.map(run, items))
    else:
        results = [run(it) for it in items]

    edofs = problem.dofmap.element_dofs
    R = np.zeros(problem.dofmap.n_dofs)
    data = np.zeros(len(problem.sparsity[1])) if jacobian else None
    for elems, r, K in results:
        bad = _first_bad_element(elems, r)
        if bad is not None:
            msg = f"non-finite residual in element {bad}"
            if msg not in problem.diagnostics:
                problem.diagnostics.append(msg)
            log.debug(msg)
        _accel.scatter_add(R, edofs[elems], r, use_numba)
        if jacobian:
            _accel.scatter_add(data, problem.element_csr_positions[elems], K, use_numba)

    if dirichlet:
        rows, values = dirichlet_rows(problem, state.t)
        if len(rows):
            R[rows] = u[rows] - values
            if jacobian:
                indptr, _ = problem.sparsity
                _accel.replace_rows_with_identity(data, indptr, rows, problem.diagonal_positions[rows], use_numba)
    J = problem.new_matrix(data) if jacobian else None
    return R, J


def dirichlet_rows(problem, t):
    """Constrained DOFs and their values; later BCs override earlier ones on shared nodes."""
    values = {}
    for bc in problem.nodal_bcs:
        for b in bc.boundaries:
            nodes = problem.mesh.boundary_nodes(b)
            g = np.broadcast_to(bc.nodal_value(t, problem.mesh.nodes[nodes]), nodes.shape)
            for d, v in zip(problem.dofmap.dof(bc.variable, nodes), g):
                values[int(d)] = float(v)
    rows = np.array(sorted(values), dtype=np.int64)
    return rows, np.array([values[r] for r in rows.tolist()])


def assemble_residual(problem, u, state=None, nworkers=1, **kw):
    return assemble(problem, u, state, jacobian=False, nworkers=nworkers, **kw)[0]


def assemble_jacobian(problem, u, state=None, nworkers=1, **kw):
    return assemble(problem, u, state, jacobian=True, nworkers=nworkers, **kw)[1]


def parallel_assemble(problem, u, nworkers, state=None):
    """Residual computed by ``nworkers`` threads; bitwise equal to the serial result."""
    if nworkers < 1:
        raise ValueError("nworkers must be >= 1")
    return assemble(problem, u, state, jacobian=False, nworkers=nworkers)[0]
