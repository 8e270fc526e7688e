"""Summary numbers computed from a trace."""
from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from .trace import TraceRecord


@dataclass
class PeriodStats:
    line: int
    channel: int
    samples: int
    mean: float
    min: int
    max: int

    @property
    def jitter(self) -> int:
        return self.max - self.min


@dataclass
class FailureStats:
    t: int
    nodes: list[int]
    lines: list[int]
    relocated: list[int]
    recovery_time: int | None  # last orphaned line re-claimed, minus kill time
    rebuilt_time: int | None  # build complete again, minus kill time


@dataclass
class Metrics:
    duration: int = 0
    build_time: int | None = None
    failures: list[FailureStats] = field(default_factory=list)
    relocations: int = 0
    messages: int = 0
    remote_messages: int = 0
    messages_per_s: float = 0.0
    bytes_per_s: float = 0.0
    remote_bytes_per_s: float = 0.0
    hormone_bytes_per_s: float = 0.0
    periods: dict[tuple[int, int], PeriodStats] = field(default_factory=dict)

    @property
    def max_jitter(self) -> int:
        return max((p.jitter for p in self.periods.values()), default=0)

    def row(self) -> dict:
        """Flat summary suitable for a one-line table."""
        rec = [f.recovery_time for f in self.failures if f.recovery_time is not None]
        return {
            "duration_ms": self.duration,
            "build_time_ms": self.build_time if self.build_time is not None else 0,
            "failures": len(self.failures),
            "recovery_time_ms": max(rec, default=0),
            "relocations": self.relocations,
            "messages_per_s": round(self.messages_per_s, 3),
            "bytes_per_s": round(self.bytes_per_s, 3),
            "remote_bytes_per_s": round(self.remote_bytes_per_s, 3),
            "hormone_bytes_per_s": round(self.hormone_bytes_per_s, 3),
            "max_jitter_ms": self.max_jitter,
        }

    def to_dict(self) -> dict:
        d = self.row()
        d["failure_detail"] = [asdict(f) for f in self.failures]
        d["periods"] = [
            {**asdict(p), "jitter": p.jitter} for _, p in sorted(self.periods.items())
        ]
        return d


def _final(records: list[TraceRecord]) -> dict:
    for r in reversed(records):
        if r.kind == "build_status" and r.payload.get("final"):
            return r.payload
    return {}


def metrics(records: list[TraceRecord]) -> Metrics:
    m = Metrics()
    if not records:
        return m
    final = _final(records)
    m.duration = int(final.get("duration", records[-1].t))

    completes = [r for r in records if r.kind == "build_status" and r.payload.get("complete")]
    if completes:
        m.build_time = completes[0].t

    kills = [r for r in records if r.kind == "kill"]
    relocs = [r for r in records if r.kind == "relocate"]
    m.relocations = len(relocs)
    for i, k in enumerate(kills):
        end = kills[i + 1].t if i + 1 < len(kills) else float("inf")
        lines = list(k.payload.get("lines", []))
        moved = {r.payload["line"]: r.t for r in relocs if k.t <= r.t < end and r.payload["line"] in lines}
        recovery = max(moved.values()) - k.t if lines and len(moved) == len(lines) else None
        if not lines:
            recovery = 0
        rebuilt = next((r.t - k.t for r in completes if k.t <= r.t < end), None)
        m.failures.append(FailureStats(k.t, list(k.payload.get("nodes", [])), lines,
                                       sorted(moved), recovery, rebuilt))

    seconds = m.duration / 1000.0 if m.duration > 0 else 0.0
    sig_bytes = int(final.get("signal_bytes", 12))
    m.messages = int(final.get("messages", 0))
    m.remote_messages = int(final.get("remote_messages", 0))
    if seconds:
        m.messages_per_s = m.messages / seconds
        m.bytes_per_s = m.messages * sig_bytes / seconds
        m.remote_bytes_per_s = m.remote_messages * sig_bytes / seconds
        m.hormone_bytes_per_s = int(final.get("hormones", 0)) * int(final.get("hormone_bytes", 16)) / seconds

    m.periods = period_stats(records)
    return m


def period_stats(records: list[TraceRecord]) -> dict[tuple[int, int], PeriodStats]:
    """Inter-emission intervals per (line, channel).

    Only stretches where the emitting line stays on one node count, so a
    relocation does not show up as jitter.
    """
    times: dict[tuple[int, int], list[tuple[int, int]]] = defaultdict(list)
    for r in records:
        if r.kind == "signal":
            times[(r.payload["line"], r.payload["channel"])].append((r.t, r.node))
    out = {}
    for key, seq in times.items():
        gaps = [b[0] - a[0] for a, b in zip(seq, seq[1:]) if a[1] == b[1] and b[0] > a[0]]
        if gaps:
            out[key] = PeriodStats(key[0], key[1], len(gaps) + 1, float(np.mean(gaps)), min(gaps), max(gaps))
    return out


def sample_and_hold(records: list[TraceRecord], line: int, channel: int = 1):
    """(times, values) of one signal, for stepwise lookup."""
    pts = [(r.t, r.payload["value"]) for r in records
           if r.kind == "signal" and r.payload["line"] == line and r.payload["channel"] == channel]
    return np.array([p[0] for p in pts], dtype=float), np.array([p[1] for p in pts], dtype=float)


def angle_deviation(records: list[TraceRecord], target_line: int):
    """(times, |angle - held target|) from plant snapshots and a target signal."""
    tt, tv = sample_and_hold(records, target_line)
    snaps = [(r.t, r.payload["angle"]) for r in records if r.kind == "plant"]
    ts = np.array([s[0] for s in snaps], dtype=float)
    ang = np.array([s[1] for s in snaps], dtype=float)
    idx = np.searchsorted(tt, ts, side="right") - 1
    ok = idx >= 0
    return ts[ok], np.abs(ang[ok] - tv[idx[ok]])


def disturbance_ratio(records: list[TraceRecord], target_line: int, kill_t: int,
                      settle_ms: int = 5000, window_ms: int = 2000) -> tuple[float, float, float]:
    """(steady p95, max after kill, ratio) of the angle deviation."""
    ts, dev = angle_deviation(records, target_line)
    steady = dev[(ts >= settle_ms) & (ts < kill_t)]
    after = dev[(ts >= kill_t) & (ts < kill_t + window_ms)]
    p95 = float(np.percentile(steady, 95))
    mx = float(after.max())
    return p95, mx, mx / p95 if p95 > 0 else float("inf")


def to_json(m: Metrics) -> str:
    return json.dumps(m.to_dict(), indent=2, sort_keys=True)


def to_csv(m: Metrics) -> str:
    row = m.row()
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
    w.writeheader()
    w.writerow(row)
    return buf.getvalue()


def format_table(m: Metrics) -> str:
    row = m.row()
    width = max(len(k) for k in row)
    lines = [f"{k:<{width}}  {v}" for k, v in row.items()]
    for f in m.failures:
        lines.append(f"kill t={f.t} nodes={f.nodes} lines={f.lines} relocated={f.relocated} "
                     f"recovery={f.recovery_time} rebuilt={f.rebuilt_time}")
    return "\n".join(lines)
