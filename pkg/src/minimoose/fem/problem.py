from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..ad import DEFAULT_CAPACITY
from ..errors import BuildError, CapacityError, MooseError
from ..mesh.structured import Mesh
from ..solver.state import TimeState
from .geometry import QpData, side_qp_data, volume_qp_data


class DofMap:
    """Variable-major numbering: ``dof(v, node) = v * n_nodes + node``."""

    def __init__(self, variables, mesh: Mesh):
        self.variables = list(variables)
        self.n_nodes = mesh.n_nodes
        self._index = {v: i for i, v in enumerate(self.variables)}
        conn = mesh.elements
        self.element_dofs = np.concatenate([conn + i * self.n_nodes for i in range(len(self.variables))], axis=1)

    @property
    def n_dofs(self) -> int:
        return len(self.variables) * self.n_nodes

    def index(self, var: str) -> int:
        try:
            return self._index[var]
        except KeyError:
            raise MooseError(f"unknown variable {var}") from None

    def dof(self, var: str, node):
        return self.index(var) * self.n_nodes + np.asarray(node)

    def var_slice(self, var: str) -> slice:
        i = self.index(var)
        return slice(i * self.n_nodes, (i + 1) * self.n_nodes)


@dataclass
class AuxField:
    name: str
    elemental: bool
    values: np.ndarray


@dataclass
class StatefulStore:
    """Old/current per-element per-qp values of stateful material properties."""

    n_elements: int
    n_qp: int
    _old: dict[str, np.ndarray] = field(default_factory=dict)
    _current: dict[str, np.ndarray] = field(default_factory=dict)

    def declare(self, name: str):
        if name not in self._old:
            self._old[name] = np.zeros((self.n_elements, self.n_qp))
            self._current[name] = np.zeros((self.n_elements, self.n_qp))

    def names(self):
        return list(self._old)

    def old(self, name: str) -> np.ndarray:
        return self._old[name]

    def current(self, name: str) -> np.ndarray:
        return self._current[name]

    def set_current(self, name: str, values):
        self._current[name][...] = values

    def set_old(self, name: str, values):
        self._old[name][...] = values

    def swap(self):
        """Promote current values to old at a timestep boundary."""
        for name in self._old:
            self._old[name][...] = self._current[name]


class FEProblem:
    """Mesh, unknowns, and the plugin objects contributing to the residual."""

    def __init__(self, mesh: Mesh, variables, capacity: int = DEFAULT_CAPACITY, quadrature_order: int = 2):
        if not variables:
            raise BuildError("at least one variable is required")
        self.mesh = mesh
        self.capacity = int(capacity)
        self.dofmap = DofMap(variables, mesh)
        nloc_total = len(variables) * mesh.nodes_per_element
        if nloc_total > self.capacity:
            raise CapacityError(
                f"{len(variables)} variables x {mesh.nodes_per_element} nodes = {nloc_total} local DOFs "
                f"exceed derivative capacity {self.capacity}"
            )
        self.quadrature_order = quadrature_order
        self.volume = volume_qp_data(mesh, quadrature_order)
        self._sides: dict[str, QpData] = {}
        self.aux: dict[str, AuxField] = {}
        self.kernels = []
        self.integrated_bcs = []
        self.nodal_bcs = []
        self.materials = []
        self.material_order = []
        self.aux_kernels = []
        self.functions = {}
        self.postprocessors = {}
        self.vector_postprocessors = {}
        self.pp_values: dict[str, float] = {}
        self.vpp_values: dict[str, dict[str, np.ndarray]] = {}
        self.initial_conditions: dict[str, object] = {}
        self.stateful = StatefulStore(mesh.n_elements, self.volume.JxW.shape[1])
        self.time = TimeState()
        self.u = np.zeros(self.dofmap.n_dofs)
        self.diagnostics: list[str] = []
        self._pattern = None
        self._elem_pos = None
        self._diag_pos = None

    # --- mesh data -----------------------------------------------------------------
    def side_data(self, boundary: str) -> QpData:
        if boundary not in self._sides:
            if boundary not in self.mesh.boundary_sets:
                raise BuildError(f"unknown boundary '{boundary}'")
            self._sides[boundary] = side_qp_data(self.mesh, self.mesh.boundary_sets[boundary], self.quadrature_order)
        return self._sides[boundary]

    @property
    def variables(self):
        return self.dofmap.variables

    def add_aux(self, name: str, elemental: bool = False):
        n = self.mesh.n_elements if elemental else self.mesh.n_nodes
        self.aux[name] = AuxField(name, elemental, np.zeros(n))

    def variable_values(self, var: str, u=None) -> np.ndarray:
        u = self.u if u is None else u
        return u[self.dofmap.var_slice(var)]

    def pp_value(self, name: str) -> float:
        try:
            return self.pp_values[name]
        except KeyError:
            if name in self.postprocessors:
                return float("nan")
            raise MooseError(f"unknown postprocessor '{name}'") from None

    # --- sparsity --------------------------------------------------------------------
    def _build_pattern(self):
        edofs = self.dofmap.element_dofs
        ne, L = edofs.shape
        rows = np.repeat(edofs, L, axis=1).ravel()
        cols = np.tile(edofs, (1, L)).ravel()
        n = self.dofmap.n_dofs
        pat = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        pat.sum_duplicates()
        pat.sort_indices()
        keys = np.repeat(np.arange(n), np.diff(pat.indptr)) * n + pat.indices
        self._elem_pos = np.searchsorted(keys, rows * n + cols).reshape(ne, L, L)
        self._diag_pos = np.searchsorted(keys, np.arange(n) * (n + 1))
        self._pattern = (pat.indptr.copy(), pat.indices.copy())

    @property
    def sparsity(self):
        if self._pattern is None:
            self._build_pattern()
        return self._pattern

    @property
    def element_csr_positions(self):
        if self._elem_pos is None:
            self._build_pattern()
        return self._elem_pos

    @property
    def diagonal_positions(self):
        if self._diag_pos is None:
            self._build_pattern()
        return self._diag_pos

    def new_matrix(self, data) -> sp.csr_matrix:
        indptr, indices = self.sparsity
        n = self.dofmap.n_dofs
        return sp.csr_matrix((data, indices, indptr), shape=(n, n))
