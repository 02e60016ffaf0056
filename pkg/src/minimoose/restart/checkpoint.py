"""Binary checkpoint files: a short text header followed by float64 sections.

Layout::

    MMCP
    version 1
    app <name>
    step <k>
    time <t>
    sections <n>
    section <name> <count>\n<count little-endian float64>\n   (n times)
    end
"""
from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from ..errors import CheckpointError

MAGIC = b"MMCP"
FORMAT_VERSION = 1
SUFFIX = ".mmcp"


def checkpoint_path(directory, app_path: str, step: int) -> Path:
    return Path(directory) / f"{app_path}_step{int(step)}{SUFFIX}"


def write_checkpoint_file(path, app_name: str, step: int, time: float, sections: dict[str, np.ndarray]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    head = [MAGIC, f"version {FORMAT_VERSION}".encode(), f"app {app_name}".encode(), f"step {int(step)}".encode()]
    head += [f"time {float(time)!r}".encode(), f"sections {len(sections)}".encode()]
    chunks = [b"\n".join(head) + b"\n"]
    for name, arr in sections.items():
        payload = np.ascontiguousarray(arr, dtype="<f8").ravel()
        chunks.append(f"section {name} {payload.size}\n".encode())
        chunks.append(payload.tobytes())
        chunks.append(b"\n")
    chunks.append(b"end\n")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(b"".join(chunks))
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise CheckpointError(f"cannot write checkpoint {path}: {exc}") from exc
    return path


def read_checkpoint_file(path):
    """Return ``(header, sections)`` from a checkpoint file."""
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint file {path} does not exist")
    blob = path.read_bytes()
    pos = 0

    def line():
        nonlocal pos
        end = blob.find(b"\n", pos)
        if end < 0:
            raise CheckpointError(f"{path}: unexpected end of file")
        text = blob[pos:end]
        pos = end + 1
        return text

    if not blob.startswith(MAGIC + b"\n"):
        raise CheckpointError(f"{path} is not a checkpoint (bad magic)")
    line()
    header = {}
    for key in ("version", "app", "step", "time", "sections"):
        words = line().decode(errors="replace").split(" ", 1)
        if words[0] != key or len(words) != 2:
            raise CheckpointError(f"{path}: malformed header, expected '{key}'")
        header[key] = words[1]
    if int(header["version"]) != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: checkpoint format version {header['version']} does not match {FORMAT_VERSION}"
        )
    header["step"] = int(header["step"])
    header["time"] = float(header["time"])
    sections = {}
    for _ in range(int(header["sections"])):
        words = line().decode(errors="replace").split()
        if len(words) != 3 or words[0] != "section":
            raise CheckpointError(f"{path}: malformed section header")
        name, count = words[1], int(words[2])
        end = pos + 8 * count
        if end + 1 > len(blob) or blob[end : end + 1] != b"\n":
            raise CheckpointError(f"{path}: truncated section '{name}'")
        sections[name] = np.frombuffer(blob[pos:end], dtype="<f8").astype(np.float64)
        pos = end + 1
    if line() != b"end":
        raise CheckpointError(f"{path}: missing end marker")
    return header, sections


def iter_apps(app):
    yield app
    for child in app.children():
        yield from iter_apps(child)


def write_checkpoint(app, directory, step: int) -> list[Path]:
    """Write one file per app in the tree rooted at ``app``, all tagged with ``step``."""
    paths = []
    for node in iter_apps(app):
        path = checkpoint_path(directory, node.path, step)
        t = node.problem.time
        paths.append(write_checkpoint_file(path, node.name, t.step, t.t, node.store.snapshot()))
    return paths


def read_checkpoint(directory, step: int, app) -> None:
    """Restore the whole app tree from the files written at ``step``."""
    loaded = []
    for node in iter_apps(app):
        path = checkpoint_path(directory, node.path, step)
        header, sections = read_checkpoint_file(path)
        if header["app"] != node.name:
            raise CheckpointError(f"{path}: written for app '{header['app']}', not '{node.name}'")
        loaded.append((node, sections))
    for node, sections in loaded:
        node.store.restore(sections)
