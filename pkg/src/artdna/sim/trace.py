"""Trace records and their NDJSON / CSV forms."""
from __future__ import annotations

import csv
import io
import json
import threading
from dataclasses import dataclass, field

KINDS = frozenset({
    "claim", "release", "orphan", "relocate", "signal", "hormone_stats", "build_status", "warning",
    "discover", "kill", "add_node", "actuate", "plant", "log", "drop", "stop",
})


@dataclass(frozen=True)
class TraceRecord:
    t: int
    kind: str
    payload: dict = field(default_factory=dict)
    node: int | None = None

    def to_dict(self) -> dict:
        d = {"t": self.t, "kind": self.kind, **self.payload}
        if self.node is not None:
            d["node"] = self.node
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TraceRecord":
        d = dict(d)
        t = d.pop("t")
        kind = d.pop("kind")
        node = d.pop("node", None)
        return cls(t, kind, d, node)


class TraceCollector:
    """Append-only, time-ordered record sink; appends are thread-safe."""

    def __init__(self):
        self.records: list[TraceRecord] = []
        self._lock = threading.Lock()

    def add(self, t: int, kind: str, node: int | None = None, **payload) -> None:
        if kind not in KINDS:
            raise ValueError(f"unknown trace kind {kind!r}")
        rec = TraceRecord(t, kind, payload, node)
        with self._lock:
            if self.records and self.records[-1].t > t:
                raise ValueError(f"trace record at t={t} after t={self.records[-1].t}")
            self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    def of_kind(self, *kinds: str) -> list[TraceRecord]:
        return [r for r in self.records if r.kind in kinds]


def to_ndjson(records) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True, separators=(",", ":")) + "\n" for r in records)


def from_ndjson(text: str) -> list[TraceRecord]:
    return [TraceRecord.from_dict(json.loads(ln)) for ln in text.splitlines() if ln.strip()]


def signals_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "line", "channel", "value"])
    for r in records:
        if r.kind == "signal":
            w.writerow([r.t, r.payload["line"], r.payload["channel"], repr(r.payload["value"])])
    return buf.getvalue()


def write_trace(records, ndjson_path=None, csv_path=None) -> None:
    if ndjson_path:
        with open(ndjson_path, "w", encoding="utf-8") as fh:
            fh.write(to_ndjson(records))
    if csv_path:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(signals_csv(records))


def read_trace(path) -> list[TraceRecord]:
    with open(path, encoding="utf-8") as fh:
        return from_ndjson(fh.read())
