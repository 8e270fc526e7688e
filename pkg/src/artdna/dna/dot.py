"""Graphviz DOT rendering of a DNA's block diagram."""
from __future__ import annotations

from ..elements.registry import is_registered, schema_of
from .model import Dna, topology


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _quote(s: str) -> str:
    return f'"{_escape(s)}"'


def to_dot(dna: Dna, name: str = "dna") -> str:
    """One node per line (``L<n>``, 1-based), one edge per link target."""
    out = [f"digraph {_quote(name)} {{", "  rankdir=LR;", "  node [shape=box];"]
    for i, line in enumerate(dna.lines):
        kind = schema_of(line.id).name if is_registered(line.id) else f"id {line.id}"
        label = _escape(f"{i + 1}: {kind}")
        if line.comment:
            label += "\\n" + _escape(line.comment)
        out.append(f'  L{i + 1} [label="{label}"];')
    for e in topology(dna).edges:
        out.append(f"  L{e.src + 1} -> L{e.dst + 1} [label={_quote(f'{e.dst_channel}>{e.src_channel}')}];")
    out.append("}")
    return "\n".join(out) + "\n"
