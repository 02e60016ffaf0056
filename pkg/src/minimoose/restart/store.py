from __future__ import annotations

from collections.abc import Callable

import numpy as np

from ..errors import CheckpointError


class RestartableStore:
    """Named data that participates in checkpoints and in-memory snapshots.

    Each entry serializes to a 1D float64 array and deserializes from one.
    """

    def __init__(self):
        self._entries: dict[str, tuple[Callable, Callable]] = {}

    def register(self, name: str, serialize: Callable[[], np.ndarray], deserialize: Callable[[np.ndarray], None]):
        if name in self._entries:
            raise CheckpointError(f"restartable datum '{name}' is already registered")
        if any(c.isspace() for c in name) or not name:
            raise CheckpointError(f"invalid restartable name {name!r}")
        self._entries[name] = (serialize, deserialize)

    def names(self) -> list[str]:
        return list(self._entries)

    def __contains__(self, name):
        return name in self._entries

    def snapshot(self) -> dict[str, np.ndarray]:
        out = {}
        for name, (ser, _) in self._entries.items():
            arr = np.array(ser(), dtype=np.float64).ravel()
            out[name] = arr
        return out

    def restore(self, data: dict[str, np.ndarray]) -> None:
        missing = [n for n in self._entries if n not in data]
        if missing:
            raise CheckpointError(f"missing section '{missing[0]}' for registered datum")
        extra = [n for n in data if n not in self._entries]
        if extra:
            raise CheckpointError(f"checkpoint section '{extra[0]}' has no registered datum")
        for name, (_, de) in self._entries.items():
            de(np.asarray(data[name], dtype=np.float64))


def register_restartable(store: RestartableStore, name: str, serialize, deserialize) -> str:
    store.register(name, serialize, deserialize)
    return name
