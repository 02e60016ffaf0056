"""Built-in volumetric kernels."""
from __future__ import annotations

import numpy as np

from ..errors import BuildError
from ..input.registry import register
from .base import Kernel, KernelGrad, KernelValue


class _PropertyCoefficient:
    """Mixin: optional material-property coefficient times a constant."""

    def coefficient(self, ctx, prop_param="diffusivity", const_param="coef"):
        coef = self.params[const_param]
        prop = self.params.get(prop_param) or ""
        if prop:
            return coef * ctx.prop(prop)
        return ctx.constant(coef)

    def consumed_properties(self):
        prop = self.params.get("diffusivity") or ""
        return [prop] if prop else []


@register("Kernel")
class Diffusion(_PropertyCoefficient, KernelGrad):
    """``-div(k grad u)`` with ``k = coef * diffusivity``."""

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("diffusivity", "string", "", "material property name (optional)")
            .add("coef", "real", 1.0)
        )

    def precompute_qp_residual(self, ctx):
        return self.coefficient(ctx) * ctx.grad_u(self.variable)


@register("Kernel")
class Advection(KernelValue):
    """``velocity . grad u`` with a constant velocity."""

    @classmethod
    def valid_params(cls):
        return super().valid_params().add("velocity", "real_list")

    def attach(self, problem):
        super().attach(problem)
        v = self.params["velocity"]
        if len(v) < problem.mesh.dim:
            raise BuildError(f"{self.name}: velocity needs {problem.mesh.dim} components")
        self.velocity = np.asarray(v[: problem.mesh.dim])

    def precompute_qp_residual(self, ctx):
        return self.velocity @ ctx.grad_u(self.variable)


@register("Kernel")
class TimeDerivative(KernelValue):
    """``coef * (u - u_old) / dt`` (implicit Euler)."""

    @classmethod
    def valid_params(cls):
        return super().valid_params().add("coef", "real", 1.0)

    transient = True

    def precompute_qp_residual(self, ctx):
        u = ctx.u(self.variable)
        return self.params["coef"] * (u - ctx.u_old(self.variable)) / ctx.dt


@register("Kernel")
class Reaction(Kernel):
    """``rate * u * test``, written against the general test-function contract."""

    @classmethod
    def valid_params(cls):
        return super().valid_params().add("rate", "real", 1.0)

    def qp_residual(self, ctx, test, grad_test):
        return self.params["rate"] * ctx.u(self.variable) * test


@register("Kernel")
class BodyForce(KernelValue):
    """``-value * f(t, x) * pp`` where the function and postprocessor are optional."""

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("value", "real", 1.0)
            .add("function", "string", "")
            .add("postprocessor", "string", "")
        )

    def attach(self, problem):
        super().attach(problem)
        fn = self.params["function"]
        if fn and fn not in problem.functions:
            raise BuildError(f"{self.name}: unknown function '{fn}'")
        pp = self.params["postprocessor"]
        if pp and pp not in problem.postprocessors:
            raise BuildError(f"{self.name}: unknown postprocessor '{pp}'")

    def precompute_qp_residual(self, ctx):
        f = np.full(ctx.shape, self.params["value"])
        if self.params["function"]:
            f = f * ctx.function_values(self.params["function"])
        if self.params["postprocessor"]:
            f = f * ctx.pp(self.params["postprocessor"])
        return -f


class _DarcyMixin:
    @classmethod
    def _darcy_params(cls, params):
        return params.add("permeability", "string", "permeability", "material property K").add(
            "viscosity", "string", "viscosity", "material property mu"
        )

    def consumed_properties(self):
        return [self.params["permeability"], self.params["viscosity"]]

    def mobility(self, ctx):
        return ctx.prop(self.params["permeability"]) / ctx.prop(self.params["viscosity"])


@register("Kernel")
class DarcyPressure(_DarcyMixin, KernelGrad):
    """``-div((K / mu) grad p)``."""

    @classmethod
    def valid_params(cls):
        return cls._darcy_params(super().valid_params())

    def precompute_qp_residual(self, ctx):
        return self.mobility(ctx) * ctx.grad_u(self.variable)


@register("Kernel")
class DarcyAdvection(_DarcyMixin, KernelValue):
    """``heat_capacity * v . grad T`` with Darcy velocity ``v = -(K / mu) grad p``."""

    @classmethod
    def valid_params(cls):
        return cls._darcy_params(
            super().valid_params().add("pressure", "string").add("heat_capacity", "real", 1.0)
        )

    def coupled_variables(self):
        return [self.params["pressure"]]

    def precompute_qp_residual(self, ctx):
        velocity = -(self.mobility(ctx) * ctx.grad_u(self.params["pressure"]))
        return self.params["heat_capacity"] * velocity.dot(ctx.grad_u(self.variable))
