from __future__ import annotations

import math
from dataclasses import dataclass

from ..elements.registry import (
    ALU_OP_NAMES,
    FLOAT,
    INT_KINDS,
    LINK_MULTIPLIER_ID,
    MAX_ELEMENT_ID,
    OP,
    PERIOD,
    UNARY_OPS,
    Mode,
    is_registered,
    schema_of,
)
from .model import MAX_LINES, MAX_SRC_CHANNEL, Dna

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    line: int | None  # 1-based, None for whole-DNA findings
    severity: str
    message: str

    def __str__(self) -> str:
        where = f"line {self.line}" if self.line is not None else "dna"
        return f"{where}: {self.severity}: {self.message}"


def errors(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity == ERROR]


def _check_params(no: int, line, out: list[Diagnostic]) -> None:
    schema = schema_of(line.id)
    if len(line.params) != schema.arity:
        names = " ".join(s.name for s in schema.param_schema) or "none"
        out.append(Diagnostic(no, ERROR, f"{schema.name} takes {schema.arity} parameters ({names}), got {len(line.params)}"))
        return
    for value, slot in zip(line.params, schema.param_schema):
        if slot.kind == FLOAT:
            if not isinstance(value, (int, float)):
                out.append(Diagnostic(no, ERROR, f"parameter {slot.name} must be a number"))
            elif not math.isfinite(value):
                out.append(Diagnostic(no, WARNING, f"parameter {slot.name} is not finite"))
        elif slot.kind in INT_KINDS:
            if not isinstance(value, int):
                out.append(Diagnostic(no, ERROR, f"parameter {slot.name} must be an integer"))
                continue
            if slot.kind == OP and value not in ALU_OP_NAMES:
                out.append(Diagnostic(no, ERROR, f"unknown ALU operation {value}"))
            if slot.kind == PERIOD:
                if value < 0:
                    out.append(Diagnostic(no, ERROR, f"period must be >= 0, got {value}"))
                elif value == 0 and schema.mode is Mode.TIMED:
                    out.append(Diagnostic(no, ERROR, f"{schema.name} is time-driven and needs a period > 0"))
    if line.id == 42:
        high, step, low = line.params
        if not step > 0 or not high > low:
            out.append(Diagnostic(no, ERROR, "Level needs step > 0 and high > low"))
    if line.id in (43, 44) and line.params[0] > line.params[1]:
        out.append(Diagnostic(no, ERROR, f"{schema.name} lower bound exceeds upper bound"))


def validate(dna: Dna) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    n = len(dna.lines)
    if n > MAX_LINES:
        out.append(Diagnostic(None, ERROR, f"{n} lines exceed the {MAX_LINES}-line capacity"))
    fed: dict[int, set[int]] = {i: set() for i in range(n)}

    for i, line in enumerate(dna.lines):
        no = i + 1
        if line.id == LINK_MULTIPLIER_ID:
            out.append(Diagnostic(no, ERROR, "element id 0 is reserved for the link multiplier"))
            continue
        if not 0 < line.id <= MAX_ELEMENT_ID:
            out.append(Diagnostic(no, ERROR, f"element id {line.id} outside 1..{MAX_ELEMENT_ID}"))
            continue
        if not is_registered(line.id):
            out.append(Diagnostic(no, ERROR, f"unknown element id {line.id}"))
            continue
        schema = schema_of(line.id)
        _check_params(no, line, out)

        channels = sorted({lk.dst_channel for lk in line.links})
        if channels and channels != list(range(1, len(channels) + 1)):
            out.append(Diagnostic(no, ERROR, f"destination channels {channels} are not contiguous from 1"))
        if channels and channels[-1] > schema.dst_channels:
            out.append(Diagnostic(no, ERROR, f"{schema.name} has {schema.dst_channels} destination channels, link uses {channels[-1]}"))
        seen = set()
        for lk in line.links:
            if lk in seen:
                out.append(Diagnostic(no, WARNING, f"duplicate link {lk.dst_channel}:{lk.line + 1}.{lk.src_channel}"))
            seen.add(lk)
            if not 0 <= lk.line < n:
                out.append(Diagnostic(no, ERROR, f"dangling reference to line {lk.line + 1}"))
                continue
            if not 1 <= lk.src_channel <= MAX_SRC_CHANNEL:
                out.append(Diagnostic(no, ERROR, f"source channel {lk.src_channel} outside 1..{MAX_SRC_CHANNEL}"))
                continue
            target = dna.lines[lk.line]
            if is_registered(target.id):
                tschema = schema_of(target.id)
                if lk.src_channel > tschema.src_channels:
                    out.append(Diagnostic(no, ERROR, f"line {lk.line + 1} ({tschema.name}) has {tschema.src_channels} source channels, link targets channel {lk.src_channel}"))
                    continue
            fed[lk.line].add(lk.src_channel)

    for i, line in enumerate(dna.lines):
        if not is_registered(line.id):
            continue
        schema = schema_of(line.id)
        required = schema.required_src
        if line.id == 1 and line.params and line.params[0] in UNARY_OPS:
            required = 1
        missing = [c for c in range(1, required + 1) if c not in fed[i]]
        if missing:
            out.append(Diagnostic(i + 1, WARNING, f"{schema.name} source channel(s) {missing} not fed"))
    return out
