"""Zero-dimensional surrogate for a degrading packed bed of solid spheres.

A sphere of radius ``r`` shrinks at the Arrhenius rate ``A exp(-Q / T)``::

    dr/dt = -A exp(-Q / T) r

integrated with backward Euler, so one step divides ``r`` by
``1 + dt A exp(-Q / T)``. The solid volume fraction scales with ``r**3``
and the effective conductivity is the volume-weighted mix of solid and fluid.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from ..errors import BuildError, MaterialError
from ..input.registry import register
from ..systems.base import Material

log = logging.getLogger(__name__)


def degradation_rate(T, A: float, Q: float):
    return A * np.exp(-Q / np.asarray(T, dtype=float))


def degrade_step(r_old, T, dt: float, A: float, Q: float):
    """One backward-Euler step of the radius ODE; clamps at zero."""
    denom = 1.0 + dt * degradation_rate(T, A, Q)
    r = np.asarray(r_old, dtype=float) / denom
    bad = ~(r >= 0.0)
    if np.any(bad):
        log.warning("sphere radius went negative (T=%s); clamped at 0", T)
        r = np.where(bad, 0.0, r)
    return r


def solid_fraction(r, r0: float, phi0: float):
    return phi0 * (np.asarray(r, dtype=float) / r0) ** 3


def effective_conductivity(r, r0: float, phi0: float, k_solid: float, k_fluid: float):
    phi = solid_fraction(r, r0, phi0)
    return phi * k_solid + (1.0 - phi) * k_fluid


DEFAULTS = {"A": 38.0, "Q": 1455.0, "r0": 1.0, "phi0": 0.64, "k_solid": 16.0, "k_fluid": 0.6}


def run_example_microstructure(state: dict, T: float, dt: float, **params):
    """Advance ``state['radius']`` one step at temperature ``T``.

    Returns ``(radius, k_eff)`` and updates ``state`` in place.
    """
    p = {**DEFAULTS, **params}
    r_old = state.get("radius", p["r0"])
    if not 0.0 <= r_old <= p["r0"]:
        raise ValueError(f"radius {r_old} outside [0, {p['r0']}]")
    r = float(degrade_step(r_old, T, dt, p["A"], p["Q"]))
    state["radius"] = r
    return r, float(effective_conductivity(r, p["r0"], p["phi0"], p["k_solid"], p["k_fluid"]))


@register("Material")
class SphereDegradation(Material):
    """Stateful sphere radius driven by a temperature postprocessor, plus ``k_eff``."""

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("temperature", "string", doc="postprocessor holding the local temperature")
            .add("prefactor", "real", DEFAULTS["A"])
            .add("activation", "real", DEFAULTS["Q"], "Q in exp(-Q / T)")
            .add("initial_radius", "real", DEFAULTS["r0"])
            .add("solid_fraction", "real", DEFAULTS["phi0"])
            .add("k_solid", "real", DEFAULTS["k_solid"])
            .add("k_fluid", "real", DEFAULTS["k_fluid"])
            .add("radius_name", "string", "radius")
            .add("conductivity_name", "string", "k_eff")
        )

    def __init__(self, name, params=None):
        super().__init__(name, params)
        p = self.params
        if not p["initial_radius"] > 0:
            raise BuildError(f"{name}: initial_radius must be positive")
        if not 0.0 <= p["solid_fraction"] <= 1.0:
            raise BuildError(f"{name}: solid_fraction must lie in [0, 1]")

    def attach(self, problem):
        super().attach(problem)
        if self.params["temperature"] not in problem.postprocessors:
            raise BuildError(f"{self.name}: unknown postprocessor '{self.params['temperature']}'")

    def provides(self):
        return [self.params["radius_name"], self.params["conductivity_name"]]

    def stateful(self):
        return [self.params["radius_name"]]

    def _declare_k(self, ctx, r):
        p = self.params
        k = effective_conductivity(r, p["initial_radius"], p["solid_fraction"], p["k_solid"], p["k_fluid"])
        ctx.declare(p["conductivity_name"], k)

    def initial_state(self, ctx):
        r = np.full(ctx.shape, self.params["initial_radius"])
        ctx.declare(self.params["radius_name"], r)
        self._declare_k(ctx, r)

    def compute(self, ctx):
        p = self.params
        T = ctx.pp(p["temperature"])
        if not (math.isfinite(T) and T > 0):
            raise MaterialError(f"{self.name}: temperature {T} is not positive")
        r = degrade_step(ctx.prop_old(p["radius_name"]), T, ctx.dt, p["prefactor"], p["activation"])
        ctx.declare(p["radius_name"], r)
        self._declare_k(ctx, r)
