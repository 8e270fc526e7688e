from __future__ import annotations

import struct
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from ..elements.registry import FLOAT, INT_KINDS, is_registered, schema_of

MAX_LINES = 65536
MAX_SRC_CHANNEL = 15
INT32_MIN, INT32_MAX = -(2**31), 2**31 - 1

_F32 = struct.Struct("<f")


def f32(x: float) -> float:
    """Round a Python float to the nearest IEEE-754 single."""
    try:
        return _F32.unpack(_F32.pack(x))[0]
    except OverflowError:
        return float("inf") if x > 0 else float("-inf")


def normalize_params(element_id: int, params: Iterable) -> tuple:
    params = tuple(params)
    if not is_registered(element_id):
        return params
    schema = schema_of(element_id)
    if len(params) != schema.arity:
        # arity mismatches are reported by validate(), keep the raw values
        return params
    out = []
    for value, slot in zip(params, schema.param_schema):
        if slot.kind == FLOAT:
            out.append(f32(float(value)))
        elif slot.kind in INT_KINDS and isinstance(value, float) and value.is_integer():
            out.append(int(value))
        else:
            out.append(value)
    return tuple(out)


@dataclass(frozen=True, order=True)
class LinkTarget:
    """Destination channel ``dst_channel`` feeds ``src_channel`` of DNA line ``line`` (0-based)."""

    dst_channel: int
    line: int
    src_channel: int


@dataclass(frozen=True)
class DnaLine:
    id: int
    links: tuple[LinkTarget, ...] = ()
    params: tuple = ()
    comment: str | None = field(default=None, compare=False)

    def __post_init__(self):
        # stable sort keeps fan-out order inside a channel
        links = tuple(sorted(self.links, key=lambda lk: lk.dst_channel))
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "params", normalize_params(self.id, self.params))

    def channels(self) -> dict[int, list[LinkTarget]]:
        by_ch: dict[int, list[LinkTarget]] = defaultdict(list)
        for lk in self.links:
            by_ch[lk.dst_channel].append(lk)
        return dict(by_ch)


@dataclass(frozen=True)
class Dna:
    lines: tuple[DnaLine, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))

    def __len__(self) -> int:
        return len(self.lines)

    def __iter__(self) -> Iterator[DnaLine]:
        return iter(self.lines)

    def __getitem__(self, i: int) -> DnaLine:
        return self.lines[i]

    def element_count(self) -> int:
        return len(self.lines)

    def distinct_elements(self) -> int:
        return len({ln.id for ln in self.lines})


@dataclass(frozen=True)
class Edge:
    src: int
    dst_channel: int
    dst: int
    src_channel: int


@dataclass
class Topology:
    """Directed multigraph over DNA line indices, one edge per link target."""

    nodes: list[int]
    edges: list[Edge]

    def successors(self, line: int) -> list[int]:
        return [e.dst for e in self.out_edges(line)]

    def out_edges(self, line: int) -> list[Edge]:
        return self._out.get(line, [])

    def in_edges(self, line: int) -> list[Edge]:
        return self._in.get(line, [])

    def predecessors(self, line: int) -> list[int]:
        return [e.src for e in self.in_edges(line)]

    def neighbors(self, line: int) -> set[int]:
        return (set(self.successors(line)) | set(self.predecessors(line))) - {line}

    def __post_init__(self):
        self._out: dict[int, list[Edge]] = defaultdict(list)
        self._in: dict[int, list[Edge]] = defaultdict(list)
        for e in self.edges:
            self._out[e.src].append(e)
            self._in[e.dst].append(e)


def topology(dna: Dna) -> Topology:
    edges = [
        Edge(i, lk.dst_channel, lk.line, lk.src_channel)
        for i, line in enumerate(dna.lines)
        for lk in line.links
    ]
    return Topology(list(range(len(dna.lines))), edges)
