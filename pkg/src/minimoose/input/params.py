"""Typed parameter declarations for constructible objects."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

KINDS = ("real", "int", "bool", "string", "real_list", "int_list", "string_list")


class _Required:
    def __repr__(self):
        return "REQUIRED"


REQUIRED = _Required()


@dataclass(frozen=True)
class ParamDescriptor:
    name: str
    kind: str
    default: Any = REQUIRED
    doc: str = ""

    @property
    def required(self) -> bool:
        return self.default is REQUIRED


class Params:
    """Ordered set of parameter descriptors (the ``validParams`` of an object)."""

    def __init__(self, descriptors=()):
        self._items: dict[str, ParamDescriptor] = {}
        for d in descriptors:
            self._items[d.name] = d

    def add(self, name, kind, default=REQUIRED, doc=""):
        if kind not in KINDS:
            raise ValueError(f"unknown parameter kind {kind!r}")
        self._items[name] = ParamDescriptor(name, kind, default, doc)
        return self

    def copy(self) -> "Params":
        return Params(self._items.values())

    def __contains__(self, name):
        return name in self._items

    def __getitem__(self, name) -> ParamDescriptor:
        return self._items[name]

    def __iter__(self):
        return iter(self._items.values())

    def names(self):
        return list(self._items)


def coerce(desc: ParamDescriptor, value):
    """Convert a parsed value to the descriptor's kind; raise ``ValueError`` on mismatch."""
    kind = desc.kind
    if kind == "real":
        if isinstance(value, list) and len(value) == 1:
            value = value[0]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"parameter '{desc.name}' expects a number")
        return float(value)
    if kind == "int":
        if isinstance(value, list) and len(value) == 1:
            value = value[0]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or float(value) != int(value):
            raise ValueError(f"parameter '{desc.name}' expects an integer")
        return int(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ValueError(f"parameter '{desc.name}' expects true or false")
        return value
    if kind == "string":
        if isinstance(value, list) and len(value) == 1:
            value = value[0]
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return repr(value)
        if not isinstance(value, str):
            raise ValueError(f"parameter '{desc.name}' expects a single word")
        return value
    items = value if isinstance(value, list) else [value]
    if kind == "real_list":
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in items):
            raise ValueError(f"parameter '{desc.name}' expects a list of numbers")
        return [float(v) for v in items]
    if kind == "int_list":
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) or float(v) != int(v) for v in items):
            raise ValueError(f"parameter '{desc.name}' expects a list of integers")
        return [int(v) for v in items]
    # string_list
    out = []
    for v in items:
        if isinstance(v, float):
            v = repr(v)
        elif isinstance(v, bool):
            v = "true" if v else "false"
        out.append(v)
    return out
