from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import MeshError
from .structured import Mesh


@dataclass
class Partition:
    nparts: int
    owner: np.ndarray  # owner[element] -> part id

    def owned(self, part: int) -> np.ndarray:
        return np.nonzero(self.owner == part)[0]


@dataclass
class GhostMap:
    ghost_elements: list[np.ndarray]
    shared_nodes: list[np.ndarray]


def _bisect(elems, centroids, nparts, first_part, owner):
    if nparts == 1:
        owner[elems] = first_part
        return
    pts = centroids[elems]
    extent = pts.max(axis=0) - pts.min(axis=0)
    axis = int(np.argmax(extent))  # lowest axis wins a tie
    order = np.lexsort((elems, pts[:, axis]))
    elems = elems[order]
    left_parts = nparts // 2
    n_left = (len(elems) * left_parts) // nparts
    _bisect(elems[:n_left], centroids, left_parts, first_part, owner)
    _bisect(elems[n_left:], centroids, nparts - left_parts, first_part + left_parts, owner)


def partition_mesh(mesh: Mesh, nparts: int) -> Partition:
    """Recursive coordinate bisection of element centroids.

    Each cut is made along the axis with the largest centroid extent; elements
    with equal coordinates are ordered by id.
    """
    nparts = int(nparts)
    if nparts < 1:
        raise MeshError(f"nparts must be >= 1, got {nparts}")
    if nparts > mesh.n_elements:
        raise MeshError(f"cannot split {mesh.n_elements} elements into {nparts} parts")
    owner = np.full(mesh.n_elements, -1, dtype=np.int64)
    _bisect(np.arange(mesh.n_elements), mesh.centroids(), nparts, 0, owner)
    return Partition(nparts, owner)


def node_to_elements(mesh: Mesh) -> list[np.ndarray]:
    buckets: list[list[int]] = [[] for _ in range(mesh.n_nodes)]
    for e, conn in enumerate(mesh.elements):
        for n in conn:
            buckets[int(n)].append(e)
    return [np.array(b, dtype=np.int64) for b in buckets]


def compute_ghosts(mesh: Mesh, partition: Partition, layers: int = 1) -> GhostMap:
    """Ghost elements reachable from owned elements through ``layers`` node-sharing hops."""
    if layers < 1:
        raise MeshError(f"ghost layers must be >= 1, got {layers}")
    n2e = node_to_elements(mesh)
    ghosts, shared = [], []
    for p in range(partition.nparts):
        owned = partition.owner == p
        reach = owned.copy()
        for _ in range(layers):
            nodes = np.unique(mesh.elements[reach])
            grow = np.zeros_like(reach)
            for n in nodes:
                grow[n2e[n]] = True
            reach |= grow
        ghosts.append(np.nonzero(reach & ~owned)[0])
        own_nodes = np.unique(mesh.elements[owned])
        foreign_nodes = np.unique(mesh.elements[~owned]) if (~owned).any() else np.array([], dtype=np.int64)
        shared.append(np.intersect1d(own_nodes, foreign_nodes))
    return GhostMap(ghosts, shared)
