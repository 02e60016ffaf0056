"""Material system: producer/consumer properties with dependency ordering."""
from __future__ import annotations

import heapq
import logging

import numpy as np

from .. import ad
from ..errors import BuildError, MaterialError
from ..input.registry import register
from .base import Material

log = logging.getLogger(__name__)


def producer_map(materials) -> dict[str, Material]:
    producers: dict[str, Material] = {}
    for m in materials:
        for prop in m.provides():
            if prop in producers:
                raise MaterialError(
                    f"property '{prop}' is produced by both {producers[prop].name} and {m.name}"
                )
            producers[prop] = m
    return producers


def _find_cycle(deps: dict[str, set[str]]) -> list[str]:
    color = {k: 0 for k in deps}
    stack: list[str] = []

    def visit(n):
        color[n] = 1
        stack.append(n)
        for m in sorted(deps[n]):
            if color[m] == 1:
                return stack[stack.index(m) :]
            if color[m] == 0:
                found = visit(m)
                if found:
                    return found
        stack.pop()
        color[n] = 2
        return None

    for n in sorted(deps):
        if color[n] == 0:
            found = visit(n)
            if found:
                return found
    return []


def resolve_material_order(materials) -> list[Material]:
    """Topological order of materials; ties broken by object name ascending."""
    producers = producer_map(materials)
    by_name = {m.name: m for m in materials}
    deps: dict[str, set[str]] = {m.name: set() for m in materials}
    for m in materials:
        for prop in m.consumes():
            if prop not in producers:
                raise MaterialError(f"{m.name} consumes property '{prop}' which no material produces")
            if producers[prop] is not m:
                deps[m.name].add(producers[prop].name)
            else:
                raise MaterialError(f"material {m.name} consumes its own property '{prop}' (cycle: {prop})")
    indeg = {n: len(d) for n, d in deps.items()}
    users: dict[str, list[str]] = {n: [] for n in deps}
    for n, d in deps.items():
        for p in d:
            users[p].append(n)
    ready = [n for n, k in indeg.items() if k == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        n = heapq.heappop(ready)
        order.append(by_name[n])
        for user in users[n]:
            indeg[user] -= 1
            if indeg[user] == 0:
                heapq.heappush(ready, user)
    if len(order) != len(materials):
        cycle = _find_cycle({n: d for n, d in deps.items() if indeg[n] > 0})
        props = sorted(
            {p for name in cycle for p in by_name[name].consumes() if producers[p].name in cycle}
        )
        raise MaterialError(f"cyclic material dependency among properties {props}")
    return order


def evaluate_materials(ctx, ordered) -> dict:
    """Fill ``ctx.props`` by running each material's ``compute`` in order."""
    for m in ordered:
        m.compute(ctx)
        for prop in m.provides():
            if prop not in ctx.props:
                raise MaterialError(f"{m.name} did not compute its property '{prop}'")
            val = ctx.props[prop].val
            if not np.all(np.isfinite(val)):
                bad = int(ctx.elements[np.argmax(~np.isfinite(val).all(axis=1))])
                msg = f"non-finite material property '{prop}' in element {bad}"
                if msg not in ctx.problem.diagnostics:
                    ctx.problem.diagnostics.append(msg)
                log.debug(msg)
    return ctx.props


# built-in materials ------------------------------------------------------------------


@register("Material")
class GenericConstantMaterial(Material):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("prop_names", "string_list").add("prop_values", "real_list")

    def __init__(self, name, params=None):
        super().__init__(name, params)
        if len(self.params["prop_names"]) != len(self.params["prop_values"]):
            raise BuildError(f"{name}: prop_names and prop_values differ in length")

    def provides(self):
        return list(self.params["prop_names"])

    def compute(self, ctx):
        for p, v in zip(self.params["prop_names"], self.params["prop_values"]):
            ctx.declare(p, v)


@register("Material")
class PolynomialMaterial(Material):
    """``property = sum_i c_i * u**i`` of a coupled variable."""

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("property", "string")
            .add("variable", "string")
            .add("coefficients", "real_list", doc="c_0 c_1 ... in increasing power")
        )

    def provides(self):
        return [self.params["property"]]

    def coupled_variables(self):
        return [self.params["variable"]]

    def compute(self, ctx):
        u = ctx.u(self.params["variable"])
        coeffs = self.params["coefficients"]
        # Horner evaluation
        acc = ctx.constant(coeffs[-1])
        for c in reversed(coeffs[:-1]):
            acc = acc * u + c
        ctx.declare(self.params["property"], acc)


@register("Material")
class ExponentialMaterial(Material):
    """``property = prefactor * exp(rate * u)``."""

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("property", "string")
            .add("variable", "string")
            .add("prefactor", "real", 1.0)
            .add("rate", "real", 1.0)
        )

    def provides(self):
        return [self.params["property"]]

    def coupled_variables(self):
        return [self.params["variable"]]

    def compute(self, ctx):
        u = ctx.u(self.params["variable"])
        ctx.declare(self.params["property"], self.params["prefactor"] * ad.exp(self.params["rate"] * u))


@register("Material")
class ProductMaterial(Material):
    """``property = scale * prod(factors) ** exponent``; builds property chains."""

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("property", "string")
            .add("factors", "string_list", doc="consumed property names")
            .add("scale", "real", 1.0)
            .add("exponent", "real", 1.0)
        )

    def provides(self):
        return [self.params["property"]]

    def consumes(self):
        return list(self.params["factors"])

    def compute(self, ctx):
        acc = ctx.constant(self.params["scale"])
        prod = ctx.constant(1.0)
        for f in self.params["factors"]:
            prod = prod * ctx.prop(f)
        if self.params["exponent"] != 1.0:
            prod = prod ** self.params["exponent"]
        ctx.declare(self.params["property"], acc * prod)


@register("Material")
class SumMaterial(Material):
    """``property = offset + sum(weights_i * terms_i)``."""

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("property", "string")
            .add("terms", "string_list")
            .add("weights", "real_list", [])
            .add("offset", "real", 0.0)
        )

    def provides(self):
        return [self.params["property"]]

    def consumes(self):
        return list(self.params["terms"])

    def compute(self, ctx):
        weights = self.params["weights"] or [1.0] * len(self.params["terms"])
        acc = ctx.constant(self.params["offset"])
        for w, term in zip(weights, self.params["terms"]):
            acc = acc + w * ctx.prop(term)
        ctx.declare(self.params["property"], acc)


@register("Material")
class FunctionMaterial(Material):
    """Property sampled from a spatial/temporal Function at each quadrature point."""

    @classmethod
    def valid_params(cls):
        return super().valid_params().add("property", "string").add("function", "string")

    def provides(self):
        return [self.params["property"]]

    def attach(self, problem):
        super().attach(problem)
        if self.params["function"] not in problem.functions:
            raise BuildError(f"{self.name}: unknown function '{self.params['function']}'")

    def compute(self, ctx):
        ctx.declare(self.params["property"], ctx.function_values(self.params["function"]))


@register("Material")
class AccumulatedDamageMaterial(Material):
    """Stateful property ``d = d_old + dt * rate * u`` integrated by backward Euler."""

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("property", "string", "damage")
            .add("variable", "string")
            .add("rate", "real", 1.0)
            .add("initial_value", "real", 0.0)
        )

    def provides(self):
        return [self.params["property"]]

    def stateful(self):
        return [self.params["property"]]

    def coupled_variables(self):
        return [self.params["variable"]]

    def initial_state(self, ctx):
        ctx.declare(self.params["property"], self.params["initial_value"])

    def compute(self, ctx):
        old = ctx.prop_old(self.params["property"])
        u = ctx.u(self.params["variable"])
        ctx.declare(self.params["property"], old + ctx.dt * self.params["rate"] * u)
