"""First-order Lagrange shape functions and Gauss quadrature on reference elements."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# reference quad node ordering (counterclockwise)
_QUAD_NODES = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def shape_values(dim: int, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if dim == 1:
        s = xi[..., 0]
        return np.stack([0.5 * (1.0 - s), 0.5 * (1.0 + s)], axis=-1)
    s, t = xi[..., 0], xi[..., 1]
    return np.stack(
        [0.25 * (1.0 + a * s) * (1.0 + b * t) for a, b in _QUAD_NODES],
        axis=-1,
    )


def reference_gradients(dim: int, xi) -> np.ndarray:
    """Gradients w.r.t. reference coordinates, shape ``(..., nloc, dim)``."""
    xi = np.asarray(xi, dtype=float)
    if dim == 1:
        g = np.array([[-0.5], [0.5]])
        return np.broadcast_to(g, xi.shape[:-1] + (2, 1)).copy()
    s, t = xi[..., 0], xi[..., 1]
    rows = []
    for a, b in _QUAD_NODES:
        rows.append(np.stack([0.25 * a * (1.0 + b * t), 0.25 * b * (1.0 + a * s)], axis=-1))
    return np.stack(rows, axis=-2)


def shape_eval(elem_type: str, ref_point):
    """Basis values and reference gradients for ``"segment"`` or ``"quad"``."""
    dim = {"segment": 1, "quad": 2}[elem_type]
    xi = np.atleast_1d(np.asarray(ref_point, dtype=float))
    return shape_values(dim, xi), reference_gradients(dim, xi)


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.weights)


def gauss_rule(dim: int, order: int = 2) -> QuadratureRule:
    """Tensor-product Gauss-Legendre rule with ``order`` points per axis."""
    x, w = np.polynomial.legendre.leggauss(order)
    if dim == 1:
        return QuadratureRule(x[:, None], w)
    # x fastest
    px, py = np.meshgrid(x, x)
    wx, wy = np.meshgrid(w, w)
    return QuadratureRule(np.stack([px.ravel(), py.ravel()], axis=1), (wx * wy).ravel())


def side_reference_points(dim: int, side: int, order: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Reference coordinates and 1D weights of quadrature points on an element side."""
    if dim == 1:
        return np.array([[-1.0 if side == 0 else 1.0]]), np.array([1.0])
    g, w = np.polynomial.legendre.leggauss(order)
    one = np.ones_like(g)
    pts = {
        0: np.stack([g, -one], axis=1),
        1: np.stack([one, g], axis=1),
        2: np.stack([-g, one], axis=1),
        3: np.stack([-one, -g], axis=1),
    }[side]
    return pts, w
