from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import MeshError

# local node pairs for each side of a counterclockwise quad
QUAD_SIDES = ((0, 1), (1, 2), (2, 3), (3, 0))
SEGMENT_SIDES = ((0,), (1,))


@dataclass
class Mesh:
    """Segment (1D) or bilinear quad (2D) mesh.

    ``boundary_sets`` maps a name to an ``(n, 2)`` int array of
    ``(element, side)`` pairs.
    """

    dim: int
    nodes: np.ndarray
    elements: np.ndarray
    boundary_sets: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def nodes_per_element(self) -> int:
        return self.elements.shape[1]

    def side_nodes(self, elem: int, side: int) -> tuple[int, ...]:
        local = (SEGMENT_SIDES if self.dim == 1 else QUAD_SIDES)[side]
        return tuple(int(self.elements[elem, a]) for a in local)

    def boundary_nodes(self, name: str) -> np.ndarray:
        if name not in self.boundary_sets:
            raise MeshError(f"unknown boundary '{name}'")
        nodes = {n for e, s in self.boundary_sets[name] for n in self.side_nodes(int(e), int(s))}
        return np.array(sorted(nodes), dtype=np.int64)

    def centroids(self) -> np.ndarray:
        return self.nodes[self.elements].mean(axis=1)

    def bounds(self) -> np.ndarray:
        return np.stack([self.nodes.min(axis=0), self.nodes.max(axis=0)], axis=1)

    def check(self) -> None:
        if self.elements.min() < 0 or self.elements.max() >= self.n_nodes:
            raise MeshError("element node id out of range")
        if self.dim == 2:
            x = self.nodes[self.elements]
            area2 = np.zeros(self.n_elements)
            for a in range(4):
                b = (a + 1) % 4
                area2 += x[:, a, 0] * x[:, b, 1] - x[:, b, 0] * x[:, a, 1]
            if np.any(area2 <= 0):
                raise MeshError("quad elements must be counterclockwise")
        nsides = 2 if self.dim == 1 else 4
        for name, sides in self.boundary_sets.items():
            if len(sides) and (sides[:, 0].max() >= self.n_elements or sides[:, 1].max() >= nsides):
                raise MeshError(f"boundary '{name}' references a nonexistent side")


def build_structured_mesh(dim, counts, bounds) -> Mesh:
    """Tensor-product mesh with auto-named boundary sets.

    >>> m = build_structured_mesh(1, [4], [[0, 1]])
    >>> m.nodes[:, 0].tolist()
    [0.0, 0.25, 0.5, 0.75, 1.0]
    """
    if dim not in (1, 2):
        raise MeshError(f"dim must be 1 or 2, got {dim}")
    counts = [int(c) for c in counts]
    if len(counts) != dim or len(bounds) != dim:
        raise MeshError("counts and bounds need one entry per axis")
    if any(c < 1 for c in counts):
        raise MeshError(f"element counts must be >= 1, got {counts}")
    for lo, hi in bounds:
        if not lo < hi:
            raise MeshError(f"inverted bounds [{lo}, {hi}]")

    axes = [np.linspace(float(lo), float(hi), c + 1) for c, (lo, hi) in zip(counts, bounds)]
    if dim == 1:
        nx = counts[0]
        nodes = axes[0][:, None]
        elements = np.stack([np.arange(nx), np.arange(1, nx + 1)], axis=1)
        sets = {
            "left": np.array([[0, 0]], dtype=np.int64),
            "right": np.array([[nx - 1, 1]], dtype=np.int64),
        }
    else:
        nx, ny = counts
        xx, yy = np.meshgrid(axes[0], axes[1])
        nodes = np.stack([xx.ravel(), yy.ravel()], axis=1)
        i, j = np.meshgrid(np.arange(nx), np.arange(ny))
        i, j = i.ravel(), j.ravel()
        n0 = j * (nx + 1) + i
        elements = np.stack([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1], axis=1)
        eid = np.arange(nx * ny).reshape(ny, nx)

        def side_set(elems, side):
            return np.stack([elems, np.full(len(elems), side)], axis=1).astype(np.int64)

        sets = {
            "bottom": side_set(eid[0, :], 0),
            "right": side_set(eid[:, -1], 1),
            "top": side_set(eid[-1, :], 2),
            "left": side_set(eid[:, 0], 3),
        }
    mesh = Mesh(dim, np.ascontiguousarray(nodes, dtype=float), elements.astype(np.int64), sets)
    mesh.check()
    return mesh


def locate_point(mesh: Mesh, point, tol: float = 1e-12):
    """Return ``(element, reference coords)`` of the lowest-id element containing ``point``."""
    from ..fem.shape import reference_gradients, shape_values

    p = np.asarray(point, dtype=float)[: mesh.dim]
    lo = mesh.nodes[mesh.elements].min(axis=1)
    hi = mesh.nodes[mesh.elements].max(axis=1)
    scale = max(1.0, float(np.abs(mesh.nodes).max()))
    cand = np.nonzero(np.all((lo - tol * scale <= p) & (p <= hi + tol * scale), axis=1))[0]
    for e in cand:
        x = mesh.nodes[mesh.elements[e]]
        xi = np.zeros(mesh.dim)
        for _ in range(20):
            phi = shape_values(mesh.dim, xi)
            dphi = reference_gradients(mesh.dim, xi)
            r = phi @ x - p
            jac = x.T @ dphi
            step = np.linalg.solve(jac, r)
            xi = xi - step
            if np.max(np.abs(step)) < 1e-15:
                break
        if np.all(np.abs(xi) <= 1.0 + 1e-10):
            return int(e), np.clip(xi, -1.0, 1.0)
    raise MeshError(f"point {tuple(np.asarray(point, dtype=float).tolist())} lies outside the mesh")
