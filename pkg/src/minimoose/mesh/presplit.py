"""Plain-text pre-split partition files, one per part."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import MeshError
from .partition import GhostMap, Partition
from .structured import Mesh

MAGIC = "minimoose-presplit v1"


@dataclass
class PartView:
    part: int
    nparts: int
    dim: int
    node_ids: np.ndarray
    coords: np.ndarray
    owned: np.ndarray
    owned_conn: np.ndarray
    ghost: np.ndarray
    ghost_conn: np.ndarray
    boundaries: dict[str, np.ndarray] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, PartView):
            return NotImplemented
        same = (self.part, self.nparts, self.dim) == (other.part, other.nparts, other.dim)
        arrays = ("node_ids", "coords", "owned", "owned_conn", "ghost", "ghost_conn")
        same = same and all(np.array_equal(getattr(self, a), getattr(other, a)) for a in arrays)
        return (
            same
            and self.boundaries.keys() == other.boundaries.keys()
            and all(np.array_equal(self.boundaries[k], other.boundaries[k]) for k in self.boundaries)
        )

    @property
    def elements(self) -> np.ndarray:
        return np.concatenate([self.owned, self.ghost])


def part_view(mesh: Mesh, partition: Partition, ghosts: GhostMap, part: int) -> PartView:
    owned = partition.owned(part)
    ghost = np.asarray(ghosts.ghost_elements[part], dtype=np.int64)
    elems = np.concatenate([owned, ghost])
    node_ids = np.unique(mesh.elements[elems])
    keep = np.zeros(mesh.n_elements, dtype=bool)
    keep[elems] = True
    bnd = {name: sides[keep[sides[:, 0]]] for name, sides in mesh.boundary_sets.items()}
    return PartView(
        part,
        partition.nparts,
        mesh.dim,
        node_ids,
        mesh.nodes[node_ids],
        owned,
        mesh.elements[owned],
        ghost,
        mesh.elements[ghost],
        bnd,
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def _render(view: PartView) -> str:
    lines = [f"{MAGIC} part {view.part} of {view.nparts}", f"dim {view.dim}", f"nodes {len(view.node_ids)}"]
    for nid, xyz in zip(view.node_ids, view.coords):
        lines.append(" ".join([str(int(nid))] + [_fmt(c) for c in xyz]))
    for label, ids, conn in (("owned", view.owned, view.owned_conn), ("ghost", view.ghost, view.ghost_conn)):
        lines.append(f"{label} {len(ids)}")
        for e, c in zip(ids, conn):
            lines.append(" ".join(str(int(v)) for v in (e, *c)))
    lines.append(f"boundaries {len(view.boundaries)}")
    for name, sides in view.boundaries.items():
        lines.append(f"{name} {len(sides)}")
        for e, s in sides:
            lines.append(f"{int(e)} {int(s)}")
    return "\n".join(lines) + "\n"


def part_file(directory, part: int) -> Path:
    return Path(directory) / f"part{part}.txt"


def write_presplit(mesh: Mesh, partition: Partition, ghosts: GhostMap, directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for p in range(partition.nparts):
        body = _render(part_view(mesh, partition, ghosts, p))
        digest = hashlib.sha256(body.encode()).hexdigest()
        path = part_file(directory, p)
        path.write_text(body + f"checksum {digest}\n")
        paths.append(path)
    return paths


def read_presplit(directory, part: int) -> PartView:
    path = part_file(directory, part)
    if not path.exists():
        raise MeshError(f"missing part file {path}")
    text = path.read_text()
    body, sep, tail = text.rpartition("checksum ")
    if not sep or hashlib.sha256(body.encode()).hexdigest() != tail.strip():
        raise MeshError(f"checksum mismatch in {path}")
    rows = iter(body.splitlines())

    def header(expect):
        words = next(rows).split()
        if words[0] != expect:
            raise MeshError(f"{path}: expected section '{expect}', got '{words[0]}'")
        return words[1:]

    first = next(rows)
    if not first.startswith(MAGIC):
        raise MeshError(f"{path} is not a pre-split part file")
    words = first.split()
    pid, nparts = int(words[3]), int(words[5])
    dim = int(header("dim")[0])
    nn = int(header("nodes")[0])
    node_rows = [next(rows).split() for _ in range(nn)]
    node_ids = np.array([int(r[0]) for r in node_rows], dtype=np.int64)
    coords = np.array([[float(v) for v in r[1:]] for r in node_rows]).reshape(nn, dim)

    def elements(label):
        n = int(header(label)[0])
        data = np.array([[int(v) for v in next(rows).split()] for _ in range(n)], dtype=np.int64)
        data = data.reshape(n, 1 + 2**dim)
        return data[:, 0], data[:, 1:]

    owned, owned_conn = elements("owned")
    ghost, ghost_conn = elements("ghost")
    nsets = int(header("boundaries")[0])
    bnd = {}
    for _ in range(nsets):
        name, count = next(rows).split()
        bnd[name] = np.array([[int(v) for v in next(rows).split()] for _ in range(int(count))], dtype=np.int64).reshape(
            -1, 2
        )
    return PartView(pid, nparts, dim, node_ids, coords, owned, owned_conn, ghost, ghost_conn, bnd)
