"""Built-in boundary conditions."""
from __future__ import annotations

import numpy as np

from ..errors import BuildError
from ..input.registry import register
from .base import IntegratedBC, NodalBC


@register("BC")
class DirichletBC(NodalBC):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("value", "real")

    def nodal_value(self, t, x):
        return np.full(len(x), self.params["value"])


@register("BC")
class FunctionDirichletBC(NodalBC):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("function", "string")

    def attach(self, problem):
        super().attach(problem)
        if self.params["function"] not in problem.functions:
            raise BuildError(f"{self.name}: unknown function '{self.params['function']}'")

    def nodal_value(self, t, x):
        return self.problem.functions[self.params["function"]].value(t, x)


@register("BC")
class PostprocessorDirichletBC(NodalBC):
    """Boundary value read from a postprocessor (e.g. a transfer receiver)."""

    @classmethod
    def valid_params(cls):
        return super().valid_params().add("postprocessor", "string")

    def nodal_value(self, t, x):
        return np.full(len(x), self.problem.pp_value(self.params["postprocessor"]))


@register("BC")
class NeumannBC(IntegratedBC):
    """Prescribed outward flux ``k grad u . n = value * f(t, x)``."""

    @classmethod
    def valid_params(cls):
        return super().valid_params().add("value", "real", 0.0).add("function", "string", "")

    def precompute_qp_residual(self, ctx):
        g = np.full(ctx.shape, self.params["value"])
        if self.params["function"]:
            g = g * ctx.function_values(self.params["function"])
        return -g


@register("BC")
class ConvectiveFluxBC(IntegratedBC):
    """Robin flux ``h (u - ambient)``; ``h = coefficient * coefficient_property``."""

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("coefficient", "real", 1.0)
            .add("coefficient_property", "string", "")
            .add("ambient", "real", 0.0)
        )

    def consumed_properties(self):
        p = self.params["coefficient_property"]
        return [p] if p else []

    def precompute_qp_residual(self, ctx):
        h = self.params["coefficient"]
        if self.params["coefficient_property"]:
            h = h * ctx.prop(self.params["coefficient_property"])
        return h * (ctx.u(self.variable) - self.params["ambient"])
