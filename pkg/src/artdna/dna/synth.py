"""Random schema-conforming DNAs for property tests and scaling runs."""
from __future__ import annotations

import random

from ..elements.registry import (
    ALU_OP_NAMES,
    BUILTIN_IDS,
    FLOAT,
    OP,
    PERIOD,
    RESOURCE,
    Mode,
    schema_of,
)
from .model import Dna, DnaLine, LinkTarget, f32

_IDS = sorted(BUILTIN_IDS)


def _float(rng: random.Random) -> float:
    pick = rng.random()
    if pick < 0.2:
        return float(rng.randint(-100, 100))
    if pick < 0.3:
        return rng.choice([0.0, 0.25, -0.5, 1e-6, 3.4e38])
    return f32(rng.uniform(-1e4, 1e4))


def random_params(rng: random.Random, element_id: int) -> tuple:
    schema = schema_of(element_id)
    values = []
    for slot in schema.param_schema:
        if slot.kind == FLOAT:
            values.append(_float(rng))
        elif slot.kind == OP:
            values.append(rng.choice(sorted(ALU_OP_NAMES)))
        elif slot.kind == RESOURCE:
            values.append(rng.randint(0, 65535))
        elif slot.kind == PERIOD:
            low = 1 if schema.mode is Mode.TIMED else 0
            values.append(rng.randint(low, 5000))
        else:
            values.append(rng.randint(-(2**31), 2**31 - 1))
    if element_id == 42:
        low = f32(rng.uniform(0, 10))
        step = f32(rng.uniform(0.05, 1.0))
        values = [f32(low + step * rng.randint(1, 16)), step, low]
    elif element_id in (43, 44):
        values.sort()
    return tuple(values)


def random_dna(rng: random.Random, n_lines: int | None = None, max_lines: int = 40,
               max_fanout: int = 3) -> Dna:
    n = n_lines if n_lines is not None else rng.randint(0, max_lines)
    ids = [rng.choice(_IDS) for _ in range(n)]
    sinks = [i for i, eid in enumerate(ids) if schema_of(eid).src_channels > 0]
    lines = []
    for eid in ids:
        schema = schema_of(eid)
        links = []
        if sinks and schema.dst_channels:
            m = rng.randint(0, min(schema.dst_channels, 4))
            for ch in range(1, m + 1):
                for _ in range(rng.randint(1, max_fanout)):
                    target = rng.choice(sinks)
                    src = rng.randint(1, schema_of(ids[target]).src_channels)
                    links.append(LinkTarget(ch, target, src))
        lines.append(DnaLine(eid, tuple(links), random_params(rng, eid)))
    return Dna(tuple(lines))
