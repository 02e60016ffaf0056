"""Mapped quadrature data for element interiors and boundary sides."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mesh.structured import Mesh
from .shape import gauss_rule, reference_gradients, shape_values, side_reference_points


@dataclass
class QpData:
    """Quadrature data for a batch of elements or sides.

    Shapes: ``elements (ne,)``, ``x (ne, nq, dim)``, ``JxW (ne, nq)``,
    ``phi (ne, nq, nloc)``, ``grad_phi (ne, nq, nloc, dim)``; ``normals`` is
    ``(ne, nq, dim)`` for sides and ``None`` for interiors.
    """

    elements: np.ndarray
    x: np.ndarray
    JxW: np.ndarray
    phi: np.ndarray
    grad_phi: np.ndarray
    normals: np.ndarray | None = None

    def __len__(self):
        return len(self.elements)

    def take(self, sel) -> "QpData":
        return QpData(
            self.elements[sel],
            self.x[sel],
            self.JxW[sel],
            self.phi[sel],
            self.grad_phi[sel],
            None if self.normals is None else self.normals[sel],
        )

    def chunk(self, start: int, stop: int) -> "QpData":
        return self.take(slice(start, stop))


def _map(coords, xi, dim):
    # coords (ne, nloc, dim); xi (nq, dim) or (ne, nq, dim)
    phi = shape_values(dim, xi)
    dphi = reference_gradients(dim, xi)
    if phi.ndim == 2:
        phi = np.broadcast_to(phi, (coords.shape[0],) + phi.shape)
        dphi = np.broadcast_to(dphi, (coords.shape[0],) + dphi.shape)
    x = np.einsum("eqa,ead->eqd", phi, coords)
    jac = np.einsum("ead,eqak->eqdk", coords, dphi)
    if dim == 1:
        det = jac[..., 0, 0]
        inv = (1.0 / det)[..., None, None]
    else:
        det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        inv = np.empty_like(jac)
        inv[..., 0, 0] = jac[..., 1, 1] / det
        inv[..., 1, 1] = jac[..., 0, 0] / det
        inv[..., 0, 1] = -jac[..., 0, 1] / det
        inv[..., 1, 0] = -jac[..., 1, 0] / det
    grad = np.einsum("eqak,eqkd->eqad", dphi, inv)
    return np.ascontiguousarray(phi), x, jac, det, grad


def volume_qp_data(mesh: Mesh, order: int = 2) -> QpData:
    rule = gauss_rule(mesh.dim, order)
    coords = mesh.nodes[mesh.elements]
    phi, x, _, det, grad = _map(coords, rule.points, mesh.dim)
    JxW = rule.weights[None, :] * np.abs(det)
    return QpData(np.arange(mesh.n_elements), x, JxW, phi, grad)


def side_qp_data(mesh: Mesh, sides: np.ndarray, order: int = 2) -> QpData:
    """Quadrature data on the listed ``(element, side)`` pairs."""
    sides = np.asarray(sides, dtype=np.int64).reshape(-1, 2)
    ns = len(sides)
    nq = 1 if mesh.dim == 1 else order
    xi = np.empty((ns, nq, mesh.dim))
    w = np.empty((ns, nq))
    for k, (_, s) in enumerate(sides):
        pts, wts = side_reference_points(mesh.dim, int(s), order)
        xi[k] = pts
        w[k] = wts
    coords = mesh.nodes[mesh.elements[sides[:, 0]]]
    phi, x, jac, _, grad = _map(coords, xi, mesh.dim)
    if mesh.dim == 1:
        sign = np.where(sides[:, 1] == 0, -1.0, 1.0)
        normals = np.broadcast_to(sign[:, None, None], (ns, nq, 1)).copy()
        JxW = w
    else:
        # tangent along the side in counterclockwise direction
        tdir = {0: (0, 1.0), 1: (1, 1.0), 2: (0, -1.0), 3: (1, -1.0)}
        t = np.empty((ns, nq, 2))
        for k, (_, s) in enumerate(sides):
            axis, sgn = tdir[int(s)]
            t[k] = sgn * jac[k, :, :, axis]
        length = np.linalg.norm(t, axis=-1)
        normals = np.stack([t[..., 1], -t[..., 0]], axis=-1) / length[..., None]
        JxW = w * length
    return QpData(sides[:, 0].copy(), x, JxW, phi, grad, normals)
