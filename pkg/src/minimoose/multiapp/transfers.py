"""Data movement between a parent app and the children of one of its MultiApps.

Transfers are not conservative: point sampling and piecewise-linear
interpolation move values, not integrals.
"""
from __future__ import annotations

import numpy as np

from ..errors import BuildError, MeshError, TransferError
from ..input.registry import register
from ..mesh.structured import locate_point
from ..systems.base import MooseObject
from ..systems.functions import PiecewiseLinear
from ..systems.postprocessors import Receiver, sample

DIRECTIONS = ("to_subapps", "from_subapps")


class Transfer(MooseObject):
    directions = DIRECTIONS

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("direction", "string")
            .add("multi_app", "string", "", "defaults to the only MultiApp")
            .add("source", "string")
            .add("target", "string")
        )

    def __init__(self, name, params=None):
        super().__init__(name, params)
        if self.direction not in self.directions:
            raise BuildError(f"{name}: direction must be one of {list(self.directions)}")
        self.multiapp = None
        self.last_values = np.zeros(0)

    @property
    def direction(self) -> str:
        return self.params["direction"]

    def bind(self, app, multiapp) -> None:
        """Check that source and target exist once the whole tree is built."""
        self.app = app
        self.multiapp = multiapp

    def execute(self) -> np.ndarray:
        """Move the data; returns the transferred values (for convergence checks)."""
        raise NotImplementedError

    def reapply(self) -> None:
        """Install ``last_values`` again after a state restore."""


@register("Transfer")
class MultiAppPointSampleTransfer(Transfer):
    """Parent field value at each child's position, pushed into a child Receiver."""

    directions = ("to_subapps",)

    def bind(self, app, multiapp):
        super().bind(app, multiapp)
        src = self.params["source"]
        if src not in app.problem.variables and src not in app.problem.aux:
            raise BuildError(f"{self.name}: unknown source variable {src}")
        mesh = app.problem.mesh
        for slot in multiapp.slots:
            pt = slot.position[: mesh.dim]
            try:
                locate_point(mesh, pt)
            except MeshError:
                raise TransferError(
                    f"{self.name}: position {list(slot.position)} of child {slot.app.path} lies outside the parent mesh"
                ) from None
            tgt = slot.app.problem.postprocessors.get(self.params["target"])
            if not isinstance(tgt, Receiver):
                raise BuildError(f"{self.name}: child {slot.app.path} has no Receiver '{self.params['target']}'")

    def _value_at(self, point):
        problem = self.app.problem
        src = self.params["source"]
        if src in problem.variables:
            return sample(problem, src, point)
        field = problem.aux[src]
        elem, xi = locate_point(problem.mesh, point)
        if field.elemental:
            return float(field.values[elem])
        from ..fem.shape import shape_values

        return float(shape_values(problem.mesh.dim, xi) @ field.values[problem.mesh.elements[elem]])

    def execute(self):
        dim = self.app.problem.mesh.dim
        vals = np.array([self._value_at(slot.position[:dim]) for slot in self.multiapp.slots])
        for slot, v in zip(self.multiapp.slots, vals):
            slot.app.problem.pp_values[self.params["target"]] = float(v)
        self.last_values = vals
        return vals


@register("Transfer")
class MultiAppGatherInterpolateTransfer(Transfer):
    """Child postprocessor values interpolated along one axis into a parent PiecewiseLinear."""

    directions = ("from_subapps",)

    @classmethod
    def valid_params(cls):
        return super().valid_params().add("axis", "string", "x")

    def bind(self, app, multiapp):
        super().bind(app, multiapp)
        axis = self.params["axis"]
        if axis not in ("x", "y", "z"):
            raise BuildError(f"{self.name}: axis must be x, y or z")
        fn = app.problem.functions.get(self.params["target"])
        if not isinstance(fn, PiecewiseLinear):
            raise BuildError(f"{self.name}: target '{self.params['target']}' is not a PiecewiseLinear function")
        for slot in multiapp.slots:
            if self.params["source"] not in slot.app.problem.postprocessors:
                raise BuildError(f"{self.name}: child {slot.app.path} has no postprocessor '{self.params['source']}'")
        coords = self.coordinates()
        if len(np.unique(coords)) != len(coords):
            raise TransferError(f"{self.name}: duplicate child positions along {axis}")

    def coordinates(self):
        k = "xyz".index(self.params["axis"])
        return np.array([slot.position[k] for slot in self.multiapp.slots])

    def execute(self):
        src = self.params["source"]
        vals = np.array([slot.app.problem.pp_value(src) for slot in self.multiapp.slots])
        if not np.all(np.isfinite(vals)):
            bad = self.multiapp.slots[int(np.argmax(~np.isfinite(vals)))].app.path
            raise TransferError(f"{self.name}: postprocessor '{src}' of child {bad} is not finite")
        self.last_values = vals
        self.reapply()
        return vals

    def reapply(self):
        if len(self.last_values) == 0:
            return
        xs = self.coordinates()
        order = np.argsort(xs, kind="stable")
        self.app.problem.functions[self.params["target"]].set_points(xs[order], self.last_values[order])


@register("Transfer")
class MultiAppFieldCopyTransfer(Transfer):
    """Copy nodal or elemental data between apps that share a mesh layout.

    Sources and targets may be variables or auxiliary fields. Copying from
    children requires a MultiApp with exactly one child.
    """

    def _field(self, problem, name):
        if name in problem.variables:
            return problem.variable_values(name)
        if name in problem.aux:
            return problem.aux[name].values
        raise BuildError(f"{self.name}: unknown field '{name}'")

    def _pairs(self):
        parent = self.app.problem
        for slot in self.multiapp.slots:
            child = slot.app.problem
            if self.direction == "to_subapps":
                yield parent, self.params["source"], child, self.params["target"]
            else:
                yield child, self.params["source"], parent, self.params["target"]

    def bind(self, app, multiapp):
        super().bind(app, multiapp)
        if self.direction == "from_subapps" and len(multiapp.slots) != 1:
            raise BuildError(f"{self.name}: copying from children needs exactly one child")
        for src_p, src, dst_p, dst in self._pairs():
            a, b = self._field(src_p, src), self._field(dst_p, dst)
            if a.shape != b.shape:
                raise TransferError(f"{self.name}: '{src}' has {a.size} values but '{dst}' has {b.size}")

    def execute(self):
        vals = []
        for src_p, src, dst_p, dst in self._pairs():
            data = self._field(src_p, src).copy()
            self._field(dst_p, dst)[...] = data
            vals.append(data)
        self.last_values = np.concatenate(vals) if vals else np.zeros(0)
        return self.last_values

    def reapply(self):
        if self.direction == "from_subapps" and len(self.last_values):
            self._field(self.app.problem, self.params["target"])[...] = self.last_values
