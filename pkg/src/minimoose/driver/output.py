"""CSV and legacy-ASCII VTK writers, plus a structural VTK checker."""
from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

VTK_CELL_TYPES = {1: 3, 2: 9}  # mesh dim -> VTK_LINE / VTK_QUAD
VTK_NODES = {3: 2, 9: 4}


def _fmt(x: float) -> str:
    # repr is the shortest string that round-trips (at most 17 significant digits)
    return repr(float(x))


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in r] for r in reader if r]
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def csv_path(out_dir, app) -> Path:
    return Path(out_dir) / f"{app.outputs.file_base}_out.csv"


def write_csv_tree(app, out_dir) -> list[Path]:
    paths = []
    for node in app.walk():
        if node.outputs.csv:
            paths.append(write_csv(csv_path(out_dir, node), node.columns, node.history))
    return paths


def vtk_path(out_dir, app, step: int) -> Path:
    return Path(out_dir) / f"{app.outputs.file_base}_step{int(step)}.vtk"


def write_vtk(path, problem, title: str = "minimoose") -> Path:
    mesh = problem.mesh
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pts = np.zeros((mesh.n_nodes, 3))
    pts[:, : mesh.dim] = mesh.nodes
    ne, npe = mesh.elements.shape
    out = ["# vtk DataFile Version 3.0", title.replace("\n", " ")[:255], "ASCII", "DATASET UNSTRUCTURED_GRID"]
    out.append(f"POINTS {mesh.n_nodes} double")
    out += [" ".join(_fmt(c) for c in p) for p in pts]
    out.append(f"CELLS {ne} {ne * (npe + 1)}")
    out += [" ".join(map(str, [npe, *e])) for e in mesh.elements]
    out.append(f"CELL_TYPES {ne}")
    out += [str(VTK_CELL_TYPES[mesh.dim])] * ne

    def scalars(name, values):
        block = [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        return block + [_fmt(v) for v in values]

    out.append(f"POINT_DATA {mesh.n_nodes}")
    for var in problem.variables:
        out += scalars(var, problem.variable_values(var))
    for name, aux in problem.aux.items():
        if not aux.elemental:
            out += scalars(name, aux.values)
    cell_fields = [(n, a) for n, a in problem.aux.items() if a.elemental]
    if cell_fields:
        out.append(f"CELL_DATA {ne}")
        for name, aux in cell_fields:
            out += scalars(name, aux.values)
    _atomic_write(path, "\n".join(out) + "\n")
    return path


def write_vtk_tree(app, out_dir) -> list[Path]:
    paths = []
    for node in app.walk():
        if node.outputs.vtk:
            path = vtk_path(out_dir, node, node.problem.time.step)
            paths.append(write_vtk(path, node.problem, f"{node.path} t={node.problem.time.t!r}"))
    return paths


def check_vtk(path) -> list[str]:
    """Structural validation of a legacy ASCII unstructured-grid file.

    Returns a list of problems; empty means the file is consistent.
    """
    lines = Path(path).read_text().splitlines()
    errs: list[str] = []
    if len(lines) < 5:
        return ["file too short"]
    if not lines[0].startswith("# vtk DataFile Version"):
        errs.append("missing version line")
    if lines[2].strip() != "ASCII":
        errs.append("format line is not ASCII")
    if lines[3].strip() != "DATASET UNSTRUCTURED_GRID":
        errs.append("dataset is not UNSTRUCTURED_GRID")
    i = 4

    def take(n):
        nonlocal i
        chunk = lines[i : i + n]
        if len(chunk) < n:
            raise IndexError
        i += n
        return chunk

    try:
        head = take(1)[0].split()
        if head[0] != "POINTS":
            return errs + ["POINTS section missing"]
        npts = int(head[1])
        for row in take(npts):
            if len(row.split()) != 3:
                errs.append("point row without 3 coordinates")
                break
            [float(v) for v in row.split()]
        head = take(1)[0].split()
        if head[0] != "CELLS":
            return errs + ["CELLS section missing"]
        ncells, size = int(head[1]), int(head[2])
        total = 0
        for row in take(ncells):
            ids = [int(v) for v in row.split()]
            total += len(ids)
            if ids[0] != len(ids) - 1:
                errs.append("cell node count mismatch")
            if any(not 0 <= k < npts for k in ids[1:]):
                errs.append("cell references a missing point")
        if total != size:
            errs.append(f"CELLS size {size} does not match {total}")
        head = take(1)[0].split()
        if head[0] != "CELL_TYPES" or int(head[1]) != ncells:
            return errs + ["CELL_TYPES section missing or miscounted"]
        take(ncells)
        seen = []
        while i < len(lines):
            head = take(1)[0].split()
            if not head:
                continue
            if head[0] not in ("POINT_DATA", "CELL_DATA"):
                errs.append(f"unexpected keyword {head[0]}")
                break
            if head[0] in seen or (head[0] == "POINT_DATA" and "CELL_DATA" in seen):
                errs.append(f"{head[0]} out of order")
            seen.append(head[0])
            n = int(head[1])
            if n != (npts if head[0] == "POINT_DATA" else ncells):
                errs.append(f"{head[0]} count {n} does not match")
            while i < len(lines) and lines[i].startswith("SCALARS"):
                take(1)
                if take(1)[0].strip() != "LOOKUP_TABLE default":
                    errs.append("missing LOOKUP_TABLE")
                vals = [float(v) for v in take(n)]
                if not np.all(np.isfinite(vals)):
                    errs.append("non-finite field value")
    except (IndexError, ValueError):
        errs.append("truncated or malformed section")
    return errs
