from __future__ import annotations

from dataclasses import dataclass

from ..errors import MooseError

SYSTEM_KINDS = ("Kernel", "BC", "Material", "AuxKernel", "Postprocessor", "Function", "Transfer", "MultiApp")

# top-level input block -> system kind of the object types it may hold
BLOCK_KINDS = {
    "Kernels": "Kernel",
    "BCs": "BC",
    "Materials": "Material",
    "AuxKernels": "AuxKernel",
    "Postprocessors": "Postprocessor",
    "VectorPostprocessors": "Postprocessor",
    "Functions": "Function",
    "Transfers": "Transfer",
    "MultiApps": "MultiApp",
}


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    kind: str
    cls: type

    @property
    def params(self):
        return self.cls.valid_params()


class Registry:
    """Table of constructible object types keyed by type name."""

    def __init__(self):
        self._entries: dict[str, RegistryEntry] = {}

    def register(self, cls, kind: str, name: str | None = None):
        if kind not in SYSTEM_KINDS:
            raise MooseError(f"unknown system kind {kind!r}")
        name = name or cls.__name__
        if name in self._entries:
            raise MooseError(f"type {name} is already registered")
        self._entries[name] = RegistryEntry(name, kind, cls)
        return cls

    def __contains__(self, name):
        return name in self._entries

    def __getitem__(self, name) -> RegistryEntry:
        return self._entries[name]

    def get(self, name):
        return self._entries.get(name)

    def names(self, kind: str | None = None):
        return sorted(n for n, e in self._entries.items() if kind is None or e.kind == kind)

    def copy(self) -> "Registry":
        new = Registry()
        new._entries = dict(self._entries)
        return new


registry = Registry()


def register(kind: str, name: str | None = None):
    """Class decorator adding a type to the default registry."""

    def deco(cls):
        return registry.register(cls, kind, name)

    return deco


def default_registry() -> Registry:
    # importing the systems package populates the table
    from .. import multiapp, systems  # noqa: F401

    return registry
