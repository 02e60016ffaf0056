"""Built-in auxiliary kernels."""
from __future__ import annotations

import numpy as np

from ..errors import BuildError
from ..input.registry import register
from .base import AuxKernel
from .postprocessors import value_context


@register("AuxKernel")
class ProjectionAux(AuxKernel):
    """Nodal copy of a variable, optionally scaled."""

    @classmethod
    def valid_params(cls):
        return super().valid_params().add("source_variable", "string").add("scale", "real", 1.0)

    def attach(self, problem):
        super().attach(problem)
        if problem.aux[self.variable].elemental:
            raise BuildError(f"{self.name}: ProjectionAux needs a nodal auxiliary variable")
        if self.params["source_variable"] not in problem.variables:
            raise BuildError(f"{self.name}: unknown variable {self.params['source_variable']}")

    def compute(self, problem, u):
        return self.params["scale"] * problem.variable_values(self.params["source_variable"], u)


@register("AuxKernel")
class MaterialRealAux(AuxKernel):
    """Element average of a material property written to an elemental field."""

    @classmethod
    def valid_params(cls):
        return super().valid_params().add("property", "string")

    def consumed_properties(self):
        return [self.params["property"]]

    def attach(self, problem):
        super().attach(problem)
        if not problem.aux[self.variable].elemental:
            raise BuildError(f"{self.name}: MaterialRealAux needs an elemental auxiliary variable")

    def compute(self, problem, u):
        ctx = value_context(problem, problem.volume, u, materials=True)
        k = ctx.prop(self.params["property"]).val
        return np.sum(ctx.JxW * k, axis=1) / np.sum(ctx.JxW, axis=1)


@register("AuxKernel")
class FunctionAux(AuxKernel):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("function", "string")

    def compute(self, problem, u):
        fn = problem.functions[self.params["function"]]
        field = problem.aux[self.variable]
        if field.elemental:
            return fn.value(problem.time.t, problem.mesh.centroids())
        return fn.value(problem.time.t, problem.mesh.nodes)
