"""Base classes for the plugin systems.

Physics objects subclass one of these and override a single method; the
framework handles quadrature, test functions, derivatives and assembly.
"""
from __future__ import annotations

from ..errors import BuildError
from ..input.params import REQUIRED, Params, coerce


class MooseObject:
    """Anything constructible from an input block."""

    @classmethod
    def valid_params(cls) -> Params:
        return Params().add("type", "string", cls.__name__, "registered type name")

    def __init__(self, name: str, params: dict | None = None):
        self.name = name
        self.params = self.fill_params(params or {})
        self.problem = None

    @classmethod
    def fill_params(cls, raw: dict) -> dict:
        declared = cls.valid_params()
        out = {}
        for desc in declared:
            if desc.name in raw:
                try:
                    out[desc.name] = coerce(desc, raw[desc.name])
                except ValueError as exc:
                    raise BuildError(f"{cls.__name__}: {exc}") from None
            elif desc.default is REQUIRED:
                raise BuildError(f"{cls.__name__}: missing required parameter '{desc.name}'")
            else:
                out[desc.name] = desc.default
        unknown = set(raw) - set(declared.names())
        if unknown:
            raise BuildError(f"{cls.__name__}: unknown parameter(s) {sorted(unknown)}")
        return out

    def attach(self, problem) -> None:
        """Resolve cross-references once every object exists."""
        self.problem = problem

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class VariableObject(MooseObject):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("variable", "string", doc="variable this object acts on")

    @property
    def variable(self) -> str:
        return self.params["variable"]

    def coupled_variables(self) -> list[str]:
        return []

    def consumed_properties(self) -> list[str]:
        return []

    def attach(self, problem):
        super().attach(problem)
        for v in [self.variable, *self.coupled_variables()]:
            if v not in problem.variables:
                raise BuildError(f"{self.name}: unknown variable {v}")


class Kernel(VariableObject):
    """General volumetric term: override :meth:`qp_residual`."""

    def qp_residual(self, ctx, test, grad_test):
        raise NotImplementedError


class KernelValue(Kernel):
    """Term of the form ``(f, test)``: override :meth:`precompute_qp_residual`."""

    def precompute_qp_residual(self, ctx):
        raise NotImplementedError


class KernelGrad(Kernel):
    """Term of the form ``(F, grad test)``: :meth:`precompute_qp_residual` returns a DualVector."""

    def precompute_qp_residual(self, ctx):
        raise NotImplementedError


class BoundaryCondition(VariableObject):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("boundary", "string_list", doc="boundary set names")

    @property
    def boundaries(self) -> list[str]:
        return self.params["boundary"]

    def attach(self, problem):
        super().attach(problem)
        for b in self.boundaries:
            if b not in problem.mesh.boundary_sets:
                raise BuildError(f"{self.name}: unknown boundary '{b}'")


class IntegratedBC(BoundaryCondition):
    """Surface term ``(f, test)`` on the listed boundaries."""

    def precompute_qp_residual(self, ctx):
        raise NotImplementedError


class NodalBC(BoundaryCondition):
    """Strong constraint ``u_i = g(t, x_i)`` imposed by row replacement."""

    def nodal_value(self, t: float, x):
        raise NotImplementedError


class Material(MooseObject):
    """Producer of named material properties."""

    def provides(self) -> list[str]:
        raise NotImplementedError

    def consumes(self) -> list[str]:
        return []

    def coupled_variables(self) -> list[str]:
        return []

    def stateful(self) -> list[str]:
        return []

    def initial_state(self, ctx) -> None:
        """Declare initial values of stateful properties (defaults to ``compute``)."""
        self.compute(ctx)

    def compute(self, ctx) -> None:
        raise NotImplementedError

    def attach(self, problem):
        super().attach(problem)
        for v in self.coupled_variables():
            if v not in problem.variables:
                raise BuildError(f"{self.name}: unknown variable {v}")


class AuxKernel(MooseObject):
    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("variable", "string", doc="auxiliary variable to fill")
            .add("execute_on", "string_list", ["initial", "timestep_end"])
        )

    @property
    def variable(self) -> str:
        return self.params["variable"]

    def attach(self, problem):
        super().attach(problem)
        if self.variable not in problem.aux:
            raise BuildError(f"{self.name}: unknown auxiliary variable {self.variable}")

    def compute(self, problem, u):
        raise NotImplementedError


class Postprocessor(MooseObject):
    vector = False

    @classmethod
    def valid_params(cls):
        return super().valid_params().add("execute_on", "string_list", ["initial", "timestep_end"])

    @property
    def execute_on(self) -> list[str]:
        return self.params["execute_on"]

    def compute(self, problem, u) -> float:
        raise NotImplementedError


class VectorPostprocessor(Postprocessor):
    vector = True

    def compute(self, problem, u) -> dict:
        raise NotImplementedError


class Function(MooseObject):
    def value(self, t: float, x):
        raise NotImplementedError
