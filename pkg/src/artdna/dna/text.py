"""Text form of a DNA (``.adna``).

One element per line::

    <id> (<dst_ch>:<line>.<src_ch> ...) <param> <param> ...   // comment

Line numbers inside links are 1-based and refer to the order of element
lines in the file. Comment-only and blank lines are skipped.
"""
from __future__ import annotations

import re

from ..elements.registry import (
    ALU_OP_NAMES,
    ALU_OPS,
    FLOAT,
    OP,
    is_registered,
    schema_of,
)
from .model import Dna, DnaLine, LinkTarget, f32


class DnaSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


_LINK = re.compile(r"(\d+):(\d+)\.(\d+)$")
_INT = re.compile(r"[+-]?\d+$")
_NUMBER = re.compile(r"[+-]?(\d+\.?\d*([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?|inf|nan)$", re.I)


def _tokens(text: str):
    """Yield (token, column) pairs; parentheses are their own tokens."""
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            yield ch, i + 1
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            yield text[i:j], i + 1
            i = j


def _number(tok: str, lineno: int, col: int, want_int: bool):
    if _INT.match(tok):
        return int(tok)
    if _NUMBER.match(tok):
        value = float(tok)
        if want_int:
            if not value.is_integer():
                raise DnaSyntaxError(f"integer expected, got {tok!r}", lineno, col)
            return int(value)
        return value
    raise DnaSyntaxError(f"number expected, got {tok!r}", lineno, col)


def _param(tok: str, kind: str | None, lineno: int, col: int):
    if kind == OP:
        if tok in ALU_OPS:
            return ALU_OPS[tok]
        return _number(tok, lineno, col, want_int=True)
    if kind == FLOAT:
        return float(_number(tok, lineno, col, want_int=False))
    if kind is None:
        return _number(tok, lineno, col, want_int=False)
    return _number(tok, lineno, col, want_int=True)


def _parse_line(body: str, comment: str | None, lineno: int, strict: bool) -> DnaLine:
    toks = list(_tokens(body))
    tok, col = toks[0]
    if not _INT.match(tok):
        raise DnaSyntaxError(f"element id expected, got {tok!r}", lineno, col)
    element_id = int(tok)
    if strict and not is_registered(element_id):
        raise DnaSyntaxError(f"unknown element id {element_id}", lineno, col)
    pos = 1
    links: list[LinkTarget] = []
    if pos < len(toks) and toks[pos][0] == "(":
        pos += 1
        while True:
            if pos >= len(toks):
                raise DnaSyntaxError("unterminated destinationlink list", lineno, len(body) + 1)
            tok, col = toks[pos]
            pos += 1
            if tok == ")":
                break
            m = _LINK.match(tok)
            if not m:
                raise DnaSyntaxError(f"malformed link {tok!r}, expected c:l.s", lineno, col)
            dst_ch, line, src_ch = (int(g) for g in m.groups())
            if line < 1:
                raise DnaSyntaxError("line numbers start at 1", lineno, col)
            links.append(LinkTarget(dst_ch, line - 1, src_ch))
    kinds: list[str | None] = []
    if is_registered(element_id):
        kinds = [slot.kind for slot in schema_of(element_id).param_schema]
    params = []
    for k, (tok, col) in enumerate(toks[pos:]):
        if tok in "()":
            raise DnaSyntaxError(f"unexpected {tok!r}", lineno, col)
        params.append(_param(tok, kinds[k] if k < len(kinds) else None, lineno, col))
    return DnaLine(element_id, tuple(links), tuple(params), comment)


def parse_text(source: str, strict: bool = False) -> Dna:
    lines = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        body, sep, comment = raw.partition("//")
        if not body.strip():
            continue
        note = comment.strip() if sep else None
        lines.append(_parse_line(body, note or None, lineno, strict))
    return Dna(tuple(lines))


def format_float(x: float) -> str:
    """Shortest decimal that reads back as the same single-precision value."""
    if x != x or x in (float("inf"), float("-inf")):
        return repr(x)
    for digits in range(1, 10):
        s = f"{x:.{digits}g}"
        if f32(float(s)) == x:
            break
    if not any(c in s for c in ".e"):
        s += ".0"
    return s


def _render_param(value, kind: str | None) -> str:
    if kind == OP and value in ALU_OP_NAMES:
        return ALU_OP_NAMES[value]
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def render_line(line: DnaLine) -> str:
    kinds: list[str | None] = []
    if is_registered(line.id):
        kinds = [slot.kind for slot in schema_of(line.id).param_schema]
    links = " ".join(f"{lk.dst_channel}:{lk.line + 1}.{lk.src_channel}" for lk in line.links)
    parts = [str(line.id), f"({links})"]
    parts += [_render_param(v, kinds[k] if k < len(kinds) else None) for k, v in enumerate(line.params)]
    out = " ".join(parts)
    if line.comment:
        out += f"  // {line.comment}"
    return out


def render_text(dna: Dna) -> str:
    if not dna.lines:
        return ""
    return "\n".join(render_line(ln) for ln in dna.lines) + "\n"
