from __future__ import annotations

import numpy as np

from ..ad import Dual, DualVector, seed_batch
from ..errors import MaterialError
from .geometry import QpData


class ElementContext:
    """Per-quadrature-point data handed to plugin objects.

    Everything is batched: arrays are indexed ``[element, qp]`` for the
    elements in :attr:`elements`, so ``ctx.grad_u("u")`` plays the role of
    ``_grad_u[_qp]`` for all quadrature points of the batch at once.
    """

    def __init__(self, problem, qp: QpData, u, time_state, derivatives: bool = True, on_side: bool = False):
        self.problem = problem
        self.qp = qp
        self.on_side = on_side
        self.time = time_state
        dofmap = problem.dofmap
        self.nloc = qp.phi.shape[-1]
        self._dofs = dofmap.element_dofs[qp.elements]
        self.local = seed_batch(u[self._dofs], problem.capacity, derivatives)
        self.n_deriv = self.local.n
        self.props: dict[str, Dual] = {}
        self._u: dict[str, Dual] = {}
        self._grad: dict[str, DualVector] = {}

    # geometry -----------------------------------------------------------------------
    @property
    def elements(self):
        return self.qp.elements

    @property
    def x(self):
        return self.qp.x

    @property
    def JxW(self):
        return self.qp.JxW

    @property
    def phi(self):
        return self.qp.phi

    @property
    def grad_phi(self):
        return self.qp.grad_phi

    @property
    def normals(self):
        return self.qp.normals

    @property
    def t(self) -> float:
        return self.time.t

    @property
    def dt(self) -> float:
        return self.time.dt

    @property
    def shape(self):
        return self.qp.JxW.shape

    # variables ----------------------------------------------------------------------
    def _local(self, var: str) -> Dual:
        vi = self.problem.dofmap.index(var)
        sl = slice(vi * self.nloc, (vi + 1) * self.nloc)
        return Dual(self.local.val[:, sl], self.local.der[:, sl, :])

    def u(self, var: str) -> Dual:
        if var not in self._u:
            lv = self._local(var)
            self._u[var] = Dual(
                np.einsum("eqa,ea->eq", self.phi, lv.val),
                np.einsum("eqa,eal->eql", self.phi, lv.der),
            )
        return self._u[var]

    def grad_u(self, var: str) -> DualVector:
        if var not in self._grad:
            lv = self._local(var)
            self._grad[var] = DualVector(
                np.einsum("eqad,ea->eqd", self.grad_phi, lv.val),
                np.einsum("eqad,eal->eqdl", self.grad_phi, lv.der),
            )
        return self._grad[var]

    def u_old(self, var: str) -> np.ndarray:
        u_old = self.time.u_old
        if u_old is None:
            return self.u(var).val
        vi = self.problem.dofmap.index(var)
        nodal = u_old[self._dofs[:, vi * self.nloc : (vi + 1) * self.nloc]]
        return np.einsum("eqa,ea->eq", self.phi, nodal)

    def aux(self, name: str) -> np.ndarray:
        field = self.problem.aux[name]
        if field.elemental:
            return np.broadcast_to(field.values[self.elements][:, None], self.shape)
        conn = self.problem.mesh.elements[self.elements]
        return np.einsum("eqa,ea->eq", self.phi, field.values[conn])

    def constant(self, value) -> Dual:
        """A derivative-free Dual shaped like this batch's quadrature points."""
        return Dual.constant(np.broadcast_to(np.asarray(value, dtype=float), self.shape), self.n_deriv)

    # materials, postprocessors, functions ------------------------------------------
    def declare(self, name: str, value) -> None:
        if not isinstance(value, Dual):
            value = self.constant(value)
        elif value.shape != self.shape:
            value = Dual(np.broadcast_to(value.val, self.shape), np.broadcast_to(value.der, self.shape + (value.n,)))
        self.props[name] = value

    def prop(self, name: str) -> Dual:
        try:
            return self.props[name]
        except KeyError:
            raise MaterialError(f"material property '{name}' has not been computed") from None

    def prop_old(self, name: str) -> np.ndarray:
        old = self.problem.stateful.old(name)[self.elements]
        if self.on_side:
            return np.broadcast_to(old.mean(axis=1)[:, None], self.shape)
        return old

    def pp(self, name: str) -> float:
        return self.problem.pp_value(name)

    def function(self, name: str):
        return self.problem.functions[name]

    def function_values(self, name: str) -> np.ndarray:
        return self.problem.functions[name].value(self.t, self.x)
