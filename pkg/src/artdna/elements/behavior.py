"""Run-time semantics of the basic elements.

An element instance is an :class:`ElementState`; :func:`on_input` and
:func:`on_tick` apply the output function and the state transition and
return the emitted ``(dst_channel, value)`` pairs. Everything an element
needs from the outside world (plant I/O, build status, trace) goes through
an ``io`` object, see :class:`ElementIO`.

Times are integer milliseconds; element arithmetic (PID, filter) uses
seconds.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Protocol

from ..dna.model import f32
from .registry import ALU_OPS, UNARY_OPS, ElementSchema, schema_of

log = logging.getLogger(__name__)

FRESH = "fresh"
LATEST = "latest"


class SchedulingError(RuntimeError):
    pass


class ElementIO(Protocol):
    def read(self, resource: int, now: int) -> float: ...

    def write(self, resource: int, value: float, now: int) -> None: ...

    def build_complete(self) -> bool: ...

    def log(self, line: int | None, channel: int, signal: "Signal", now: int) -> None: ...

    def stop(self, line: int | None, now: int) -> None: ...

    def warn(self, message: str, now: int) -> None: ...


@dataclass(frozen=True)
class Signal:
    value: float
    src: tuple[int, int] | None = None  # (line, dst_channel)
    dst: tuple[int, int] | None = None  # (line, src_channel)
    timestamp: int = 0


@dataclass
class ElementState:
    element_id: int
    params: tuple
    line: int | None = None
    connected: frozenset = frozenset()
    join: str = FRESH
    inputs: dict = field(default_factory=dict)
    fresh: set = field(default_factory=set)
    last_fire: int | None = None
    last_input_t: int | None = None
    s: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "element_id": self.element_id,
            "params": list(self.params),
            "line": self.line,
            "connected": sorted(self.connected),
            "join": self.join,
            "inputs": {str(k): v for k, v in self.inputs.items()},
            "fresh": sorted(self.fresh),
            "last_fire": self.last_fire,
            "last_input_t": self.last_input_t,
            "s": dict(self.s),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ElementState":
        return cls(
            d["element_id"], tuple(d["params"]), d["line"], frozenset(d["connected"]), d["join"],
            {int(k): v for k, v in d["inputs"].items()}, set(d["fresh"]), d["last_fire"],
            d["last_input_t"], dict(d["s"]),
        )


class _NullIO:
    def read(self, resource, now):
        raise LookupError(f"no plant bound, cannot read resource {resource}")

    def write(self, resource, value, now):
        pass

    def build_complete(self):
        return False

    def log(self, line, channel, signal, now):
        log.info("dna log t=%s line=%s ch=%s value=%s", now, line, channel, signal.value)

    def stop(self, line, now):
        log.info("stop requested by line %s at t=%s", line, now)

    def warn(self, message, now):
        log.warning("t=%s: %s", now, message)


NULL_IO = _NullIO()


def _required(st: ElementState, channels) -> set[int]:
    chans = set(channels)
    if st.connected:
        chans &= st.connected
    return chans


def _joined(st: ElementState, required: set[int], channel: int | None) -> bool:
    """Dataflow join over several inputs, see FRESH / LATEST."""
    if not required:
        return False
    if st.join == LATEST:
        return (channel is None or channel in required) and required <= st.inputs.keys()
    return required <= st.fresh


def _alu(op: int, a: float, b: float, st: ElementState, now: int, io) -> float:
    if op == ALU_OPS["plus"]:
        return a + b
    if op == ALU_OPS["minus"]:
        return a - b
    if op == ALU_OPS["mult"]:
        return a * b
    if op == ALU_OPS["div"]:
        if b == 0:
            io.warn(f"line {st.line}: ALU division by zero, emitting 0.0", now)
            return 0.0
        return a / b
    if op == ALU_OPS["min"]:
        return min(a, b)
    if op == ALU_OPS["max"]:
        return max(a, b)
    if op == ALU_OPS["greater"]:
        return 1.0 if a > b else 0.0
    if op == ALU_OPS["less"]:
        return 1.0 if a < b else 0.0
    if op == ALU_OPS["equal"]:
        return 1.0 if a == b else 0.0
    if op == ALU_OPS["abs"]:
        return abs(a)
    if op == ALU_OPS["neg"]:
        return -a
    raise ValueError(f"unknown ALU operation {op}")


def _pid_gains(st: ElementState) -> tuple[float, float, float]:
    p = st.params
    eid = st.element_id
    if eid == 10:
        return p[0], p[1], p[2]
    if eid == 11:
        return p[0], 0.0, 0.0
    if eid == 12:
        return 0.0, p[0], 0.0
    return 0.0, 0.0, p[0]


def _pid_step(st: ElementState, dt: float) -> float:
    kp, ki, kd = _pid_gains(st)
    e = st.inputs[1]
    s = st.s
    s["integral"] += e * dt
    deriv = (e - s["last_error"]) / dt if s["primed"] and dt > 0 else 0.0
    s["last_error"] = e
    s["primed"] = True
    return kp * e + ki * s["integral"] + kd * deriv


def _filter_step(st: ElementState, dt: float) -> float:
    alpha = st.params[0]
    accel = st.inputs.get(1, 0.0)
    gyro = st.inputs.get(2, 0.0)
    est = alpha * (st.s["estimate"] + gyro * dt) + (1.0 - alpha) * accel
    st.s["estimate"] = est
    return est


def _level_outputs(params, x: float) -> list[tuple[int, float]]:
    high, step, low = params
    m = max(1, min(16, round((high - low) / step)))
    return [(k, 1.0 if x >= low + (k - 1) * step else 0.0) for k in range(1, m + 1)]


def init_state(element_id: int, params, line: int | None = None, connected=None,
               join: str = FRESH) -> ElementState:
    schema = schema_of(element_id)
    params = tuple(params)
    if len(params) != schema.arity:
        raise ValueError(f"{schema.name} takes {schema.arity} parameters, got {len(params)}")
    if connected is None:
        connected = range(1, schema.src_channels + 1)
    st = ElementState(element_id, params, line, frozenset(connected), join)
    if element_id in (10, 11, 12, 13):
        st.s.update(integral=0.0, last_error=0.0, primed=False)
    elif element_id == 44:
        st.s["latch"] = 0.0
    elif element_id == 50:
        st.s["estimate"] = 0.0
    elif element_id == 71:
        st.s["count"] = 0
    return st


def on_input(state: ElementState, schema: ElementSchema, channel: int, signal, now: int,
             io=None) -> tuple[ElementState, list[tuple[int, float]]]:
    io = io or NULL_IO
    if not 1 <= channel <= schema.src_channels:
        raise ValueError(f"{schema.name} has {schema.src_channels} source channels, got input on {channel}")
    sig = signal if isinstance(signal, Signal) else Signal(float(signal), timestamp=now)
    st = state
    st.inputs[channel] = sig.value
    st.fresh.add(channel)
    prev_t = st.last_input_t
    st.last_input_t = now
    if schema.is_timed(st.params):
        return st, []
    out = _fire_input(st, channel, sig, now, prev_t, io)
    return st, [(ch, f32(v)) for ch, v in out]


def _fire_input(st: ElementState, channel: int, sig: Signal, now: int, prev_t, io) -> list:
    eid = st.element_id
    x = st.inputs[channel]
    if eid == 1:
        op = st.params[0]
        required = {1} if op in UNARY_OPS else _required(st, (1, 2))
        if not _joined(st, required, channel):
            return []
        st.fresh.clear()
        return [(1, _alu(op, st.inputs.get(1, 0.0), st.inputs.get(2, 0.0), st, now, io))]
    if eid in (10, 11, 12, 13):
        dt = (now - prev_t) / 1000.0 if prev_t is not None else 0.0
        return [(1, _pid_step(st, dt))]
    if eid == 40:
        if 1 not in st.inputs:
            return []
        k = round(st.inputs[1]) + 1
        if k not in st.inputs:
            return []
        if channel not in (1, k):
            return []
        return [(1, st.inputs[k])]
    if eid == 41:
        if not {1, 2} <= st.inputs.keys():
            return []
        k = round(st.inputs[1])
        if not 1 <= k <= 8:
            io.warn(f"line {st.line}: demultiplexer selector {st.inputs[1]} out of range", now)
            return []
        return [(k, st.inputs[2])]
    if eid == 42:
        return _level_outputs(st.params, x)
    if eid == 43:
        lo, hi = st.params
        return [(1, min(max(x, lo), hi))]
    if eid == 44:
        low, high = st.params
        if x > high:
            st.s["latch"] = 1.0
        elif x < low:
            st.s["latch"] = 0.0
        return [(1, st.s["latch"])]
    if eid == 45:
        return [(1, 1.0 if x >= st.params[0] else 0.0)]
    if eid == 50:
        if not _joined(st, _required(st, (1, 2)), channel):
            return []
        st.fresh.clear()
        last = st.s.get("last_fire_t")
        dt = (now - last) / 1000.0 if last is not None else 0.0
        st.s["last_fire_t"] = now
        return [(1, _filter_step(st, dt))]
    if eid == 71:
        st.s["count"] += 1
        return [(1, float(st.s["count"]))]
    if eid == 600:
        io.write(st.params[0], x, now)
        return []
    if eid == 997:
        if x != 0:
            io.stop(st.line, now)
        return []
    if eid == 999:
        io.log(st.line, channel, sig, now)
        return []
    return []


def on_tick(state: ElementState, schema: ElementSchema, now: int,
            io=None) -> tuple[ElementState, list[tuple[int, float]]]:
    io = io or NULL_IO
    st = state
    if not schema.is_timed(st.params):
        raise SchedulingError(f"{schema.name} on line {st.line} is not time-driven")
    period = schema.period_of(st.params)
    if st.last_fire is not None and now - st.last_fire < period:
        raise SchedulingError(
            f"{schema.name} on line {st.line} ticked at {now}, {now - st.last_fire} ms after the last fire (period {period})"
        )
    st.last_fire = now
    dt = period / 1000.0
    eid = st.element_id
    out: list[tuple[int, float]] = []
    if eid in (10, 11, 12, 13):
        if 1 in st.inputs:
            out = [(1, _pid_step(st, dt))]
    elif eid == 50:
        if _required(st, (1, 2)) <= st.inputs.keys():
            out = [(1, _filter_step(st, dt))]
    elif eid == 70:
        out = [(1, st.params[0])]
    elif eid == 71:
        st.s["count"] += 1
        out = [(1, float(st.s["count"]))]
    elif eid == 500:
        out = [(1, io.read(st.params[0], now))]
    elif eid == 998:
        out = [(1, 1.0 if io.build_complete() else 0.0)]
    st.fresh.clear()
    return st, [(ch, f32(v)) for ch, v in out]


__all__ = [
    "ElementIO", "ElementState", "FRESH", "LATEST", "NULL_IO", "SchedulingError", "Signal",
    "init_state", "on_input", "on_tick",
]
