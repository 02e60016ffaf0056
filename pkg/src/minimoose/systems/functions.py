from __future__ import annotations

import numpy as np

from ..errors import BuildError
from ..input.registry import register
from .base import Function


def _shape_of(x):
    x = np.asarray(x, dtype=float)
    return x.shape[:-1] if x.ndim else ()


@register("Function")
class ConstantFunction(Function):
    @classmethod
    def valid_params(cls):
        return super().valid_params().add("value", "real", 0.0)

    def value(self, t, x):
        return np.full(_shape_of(x), self.params["value"])


@register("Function")
class LinearRamp(Function):
    """Linear in time from ``v0`` at ``t0`` to ``v1`` at ``t1``, clamped outside."""

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("t0", "real")
            .add("t1", "real")
            .add("v0", "real")
            .add("v1", "real")
        )

    def __init__(self, name, params=None):
        super().__init__(name, params)
        if not self.params["t1"] > self.params["t0"]:
            raise BuildError(f"{name}: t1 must exceed t0")

    def scalar(self, t: float) -> float:
        p = self.params
        s = min(max((t - p["t0"]) / (p["t1"] - p["t0"]), 0.0), 1.0)
        return p["v0"] + s * (p["v1"] - p["v0"])

    def value(self, t, x):
        return np.full(_shape_of(x), self.scalar(t))


@register("Function")
class PiecewiseLinear(Function):
    """Piecewise-linear interpolation in time or along a spatial axis.

    Values beyond the end points are held constant. A single point gives a
    constant function.
    """

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("x", "real_list", doc="abscissae, strictly increasing")
            .add("y", "real_list")
            .add("axis", "string", "t", "t, x, or y")
        )

    def __init__(self, name, params=None):
        super().__init__(name, params)
        if self.params["axis"] not in ("t", "x", "y"):
            raise BuildError(f"{name}: axis must be t, x or y")
        self.set_points(self.params["x"], self.params["y"])

    def set_points(self, xs, ys):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1 or len(xs) == 0:
            raise BuildError(f"{self.name}: x and y must be equal-length non-empty lists")
        if np.any(np.diff(xs) <= 0):
            raise BuildError(f"{self.name}: abscissae must be strictly increasing")
        self.xs, self.ys = xs, ys

    def interpolate(self, s):
        return np.interp(s, self.xs, self.ys)

    def value(self, t, x):
        axis = self.params["axis"]
        if axis == "t":
            return np.full(_shape_of(x), float(self.interpolate(t)))
        x = np.asarray(x, dtype=float)
        return self.interpolate(x[..., 0 if axis == "x" else 1])


@register("Function")
class SineProductFunction(Function):
    """``amplitude * prod_d sin(pi * k * x_d)`` (manufactured-solution helper)."""

    @classmethod
    def valid_params(cls):
        return super().valid_params().add("amplitude", "real", 1.0).add("wavenumber", "real", 1.0)

    def value(self, t, x):
        x = np.asarray(x, dtype=float)
        k = np.pi * self.params["wavenumber"]
        return self.params["amplitude"] * np.prod(np.sin(k * x), axis=-1)
