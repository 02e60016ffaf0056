"""Built-in postprocessors (scalar) and vector postprocessors."""
from __future__ import annotations

import numpy as np

from ..errors import BuildError, MeshError
from ..fem.context import ElementContext
from ..fem.shape import shape_values
from ..input.registry import register
from ..mesh.structured import locate_point
from .base import Postprocessor, VectorPostprocessor
from .materials import evaluate_materials


def value_context(problem, qp, u, materials=False) -> ElementContext:
    ctx = ElementContext(problem, qp, u, problem.time, derivatives=False, on_side=qp.normals is not None)
    if materials:
        if problem.time.step == 0:
            # nothing committed yet: stateful properties hold their initial values
            for m in problem.material_order:
                (m.initial_state if m.stateful() else m.compute)(ctx)
        else:
            evaluate_materials(ctx, problem.material_order)
    return ctx


def sample(problem, var: str, point, u=None) -> float:
    """Finite-element interpolant of ``var`` at a physical point."""
    u = problem.u if u is None else u
    elem, xi = locate_point(problem.mesh, point)
    phi = shape_values(problem.mesh.dim, xi)
    nodal = problem.variable_values(var, u)[problem.mesh.elements[elem]]
    return float(phi @ nodal)


class _VariablePP(Postprocessor):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("variable", "string")

    def attach(self, problem):
        super().attach(problem)
        if self.params["variable"] not in problem.variables:
            raise BuildError(f"{self.name}: unknown variable {self.params['variable']}")


@register("Postprocessor")
class ElementIntegral(_VariablePP):
    def compute(self, problem, u):
        ctx = value_context(problem, problem.volume, u)
        return float(np.sum(ctx.JxW * ctx.u(self.params["variable"]).val))


@register("Postprocessor")
class ElementAverage(_VariablePP):
    def compute(self, problem, u):
        ctx = value_context(problem, problem.volume, u)
        return float(np.sum(ctx.JxW * ctx.u(self.params["variable"]).val) / np.sum(ctx.JxW))


@register("Postprocessor")
class SideFluxIntegral(_VariablePP):
    """Outward flux ``integral of k grad u . n`` over a boundary."""

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("boundary", "string_list")
            .add("diffusivity", "string", "", "material property name (optional)")
            .add("coef", "real", 1.0)
        )

    def attach(self, problem):
        super().attach(problem)
        for b in self.params["boundary"]:
            if b not in problem.mesh.boundary_sets:
                raise BuildError(f"{self.name}: unknown boundary '{b}'")

    def compute(self, problem, u):
        total = 0.0
        prop = self.params["diffusivity"]
        for b in self.params["boundary"]:
            ctx = value_context(problem, problem.side_data(b), u, materials=bool(prop))
            k = self.params["coef"] * (ctx.prop(prop).val if prop else 1.0)
            grad = ctx.grad_u(self.params["variable"]).val
            flux = np.einsum("eqd,eqd->eq", grad, ctx.normals)
            total += float(np.sum(ctx.JxW * k * flux))
        return total


@register("Postprocessor")
class SideIntegral(_VariablePP):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("boundary", "string_list")

    def compute(self, problem, u):
        return float(
            sum(
                np.sum(ctx.JxW * ctx.u(self.params["variable"]).val)
                for ctx in (value_context(problem, problem.side_data(b), u) for b in self.params["boundary"])
            )
        )


@register("Postprocessor")
class PointValue(_VariablePP):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("point", "real_list")

    def attach(self, problem):
        super().attach(problem)
        try:
            locate_point(problem.mesh, self.params["point"])
        except MeshError as exc:
            raise BuildError(f"{self.name}: {exc}") from None

    def compute(self, problem, u):
        return sample(problem, self.params["variable"], self.params["point"], u)


@register("Postprocessor")
class NodalExtremeValue(_VariablePP):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("value_type", "string", "max", "max or min")

    def compute(self, problem, u):
        vals = problem.variable_values(self.params["variable"], u)
        return float(vals.max() if self.params["value_type"] == "max" else vals.min())


@register("Postprocessor")
class ElementAverageMaterialProperty(Postprocessor):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("property", "string")

    def consumed_properties(self):
        return [self.params["property"]]

    def compute(self, problem, u):
        ctx = value_context(problem, problem.volume, u, materials=True)
        return float(np.sum(ctx.JxW * ctx.prop(self.params["property"]).val) / np.sum(ctx.JxW))


@register("Postprocessor")
class FunctionValuePostprocessor(Postprocessor):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("function", "string").add("point", "real_list", [0.0, 0.0, 0.0])

    def compute(self, problem, u):
        x = np.asarray(self.params["point"] + [0.0] * 3)[: problem.mesh.dim]
        return float(problem.functions[self.params["function"]].value(problem.time.t, x[None, :])[0])


@register("Postprocessor")
class Receiver(Postprocessor):
    """Holds a value pushed in from elsewhere (typically a transfer)."""

    @classmethod
    def valid_params(cls):
        return super().valid_params().add("default", "real", 0.0)

    def compute(self, problem, u):
        return problem.pp_values.get(self.name, self.params["default"])


@register("Postprocessor")
class LineValueSampler(VectorPostprocessor):
    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("variable", "string")
            .add("start_point", "real_list")
            .add("end_point", "real_list")
            .add("num_points", "int", 10)
        )

    def compute(self, problem, u):
        a = np.asarray(self.params["start_point"], dtype=float)
        b = np.asarray(self.params["end_point"], dtype=float)
        s = np.linspace(0.0, 1.0, self.params["num_points"])
        pts = a[None, :] + s[:, None] * (b - a)[None, :]
        vals = np.array([sample(problem, self.params["variable"], p, u) for p in pts])
        out = {"x": pts[:, 0]}
        if pts.shape[1] > 1 and problem.mesh.dim > 1:
            out["y"] = pts[:, 1]
        out[self.params["variable"]] = vals
        return out
