"""Reader and canonical writer for the hierarchical block input format.

::

    [Kernels]
      [diff]
        type = Diffusion
        variable = u     # comment
      []
    []

Unquoted values are scalars (number, ``true``/``false`` or a single word);
quoted values are lists, numeric when every token parses as a number.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from ..errors import InputSyntaxError

ParamValue = Union[str, float, bool, list]

_NUMBER = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_NAME = re.compile(r"[A-Za-z0-9_.:/+-]+$")
_STOP = set(" \t\r\n=[]#'\"")


@dataclass
class SpecBlock:
    name: str
    params: dict[str, ParamValue] = field(default_factory=dict)
    children: list["SpecBlock"] = field(default_factory=list)
    line: int = 0

    def __eq__(self, other):
        if not isinstance(other, SpecBlock):
            return NotImplemented
        return (
            self.name == other.name
            and list(self.params.items()) == list(other.params.items())
            and self.children == other.children
        )

    def child(self, name: str) -> "SpecBlock | None":
        for c in self.children:
            if c.name == name:
                return c
        return None

    def walk(self, prefix=""):
        """Yield ``(path, block)`` for every descendant."""
        for c in self.children:
            path = f"{prefix}/{c.name}" if prefix else c.name
            yield path, c
            yield from c.walk(path)


@dataclass
class SpecTree:
    root: SpecBlock = field(default_factory=lambda: SpecBlock(""))

    def __getitem__(self, name) -> SpecBlock:
        block = self.root.child(name)
        if block is None:
            raise KeyError(name)
        return block

    def get(self, name):
        return self.root.child(name)


def _scalar(token: str) -> ParamValue:
    if token == "true":
        return True
    if token == "false":
        return False
    if _NUMBER.match(token):
        return float(token)
    return token


def _list(text: str) -> list:
    tokens = text.split()
    if tokens and all(_NUMBER.match(t) for t in tokens):
        return [float(t) for t in tokens]
    return tokens


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def peek(self, k=0):
        i = self.pos + k
        return self.text[i] if i < len(self.text) else ""

    def advance(self):
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def skip_blank(self, newlines=True):
        while self.pos < len(self.text):
            ch = self.peek()
            if ch == "#":
                while self.pos < len(self.text) and self.peek() != "\n":
                    self.advance()
            elif ch in " \t\r" or (newlines and ch == "\n"):
                self.advance()
            else:
                break

    def word(self):
        start = self.pos
        while self.pos < len(self.text) and self.peek() not in _STOP:
            self.advance()
        return self.text[start : self.pos]


def parse_input(text: str) -> SpecTree:
    """Parse input text into a :class:`SpecTree`.

    Raises :class:`InputSyntaxError` with line/column for unterminated
    blocks or quotes, duplicate keys, and malformed values.
    """
    sc = _Scanner(text)
    root = SpecBlock("")
    stack = [root]
    while True:
        sc.skip_blank()
        if sc.pos >= len(text):
            break
        line, col = sc.line, sc.col
        ch = sc.peek()
        if ch == "[":
            sc.advance()
            start = sc.pos
            while sc.pos < len(text) and sc.peek() not in "]\n":
                sc.advance()
            if sc.peek() != "]":
                raise InputSyntaxError("unterminated block header", line, col)
            header = text[start : sc.pos].strip()
            sc.advance()
            if header in ("", "../"):
                if len(stack) == 1:
                    raise InputSyntaxError("block close without matching open", line, col)
                stack.pop()
                continue
            if header.startswith("./"):
                header = header[2:]
            if not _NAME.match(header):
                raise InputSyntaxError(f"bad block name '{header}'", line, col)
            parent = stack[-1]
            if parent.child(header) is not None:
                raise InputSyntaxError(f"duplicate block {header}", line, col)
            block = SpecBlock(header, line=line)
            parent.children.append(block)
            stack.append(block)
            continue
        key = sc.word()
        if not key:
            raise InputSyntaxError(f"unexpected character {ch!r}", line, col)
        sc.skip_blank(newlines=False)
        if sc.peek() != "=":
            raise InputSyntaxError(f"expected '=' after '{key}'", sc.line, sc.col)
        sc.advance()
        sc.skip_blank(newlines=False)
        vline, vcol = sc.line, sc.col
        q = sc.peek()
        if q in ("'", '"'):
            sc.advance()
            start = sc.pos
            while sc.pos < len(text) and sc.peek() != q:
                sc.advance()
            if sc.pos >= len(text):
                raise InputSyntaxError(f"unterminated quote for '{key}'", vline, vcol)
            value: ParamValue = _list(text[start : sc.pos])
            sc.advance()
        else:
            token = sc.word()
            if not token:
                raise InputSyntaxError(f"missing value for '{key}'", vline, vcol)
            value = _scalar(token)
        nxt = sc.peek()
        if nxt and nxt not in " \t\r\n#[":
            raise InputSyntaxError(f"bad literal for '{key}'", sc.line, sc.col)
        block = stack[-1]
        if key in block.params:
            raise InputSyntaxError(f"duplicate key {key}", line, col)
        block.params[key] = value
    if len(stack) > 1:
        open_block = stack[-1]
        raise InputSyntaxError(f"unterminated block [{open_block.name}]", open_block.line)
    return SpecTree(root)


def _render_value(v: ParamValue) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return "'" + " ".join(_render_value(x) for x in v) + "'"
    return str(v)


def render(tree: SpecTree) -> str:
    """Canonical text form; ``parse_input(render(t)) == t``."""
    out: list[str] = []

    def emit(block: SpecBlock, depth: int):
        pad = "  " * depth
        for k, v in block.params.items():
            out.append(f"{pad}{k} = {_render_value(v)}")
        for c in block.children:
            out.append(f"{pad}[{c.name}]")
            emit(c, depth + 1)
            out.append(f"{pad}[]")

    emit(tree.root, 0)
    return "\n".join(out) + ("\n" if out else "")
