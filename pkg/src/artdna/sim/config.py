"""Simulation configuration, failure scripts and scenario files."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..ahs import AXES, HormoneConfig, NodeProfile, NodeState
from ..elements.behavior import FRESH, LATEST

SCENARIO_VERSION = 1
SCENARIO_DIR_ENV = "ARTDNA_SCENARIO_DIR"

KILL_NODE, KILL_GROUP, ADD_NODE = "kill_node", "kill_group", "add_node"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FailureEvent:
    kind: str
    t: int
    nodes: tuple[int, ...] = ()
    profile: NodeProfile | None = None


@dataclass
class FailureScript:
    events: list[FailureEvent] = field(default_factory=list)

    def __post_init__(self):
        self.events = sorted(self.events, key=lambda e: e.t)

    @classmethod
    def from_list(cls, items: list[dict], groups: dict[int, list[int]] | None = None) -> "FailureScript":
        events = []
        for d in items:
            kind, t = d["kind"], int(d["t"])
            if kind == KILL_NODE:
                events.append(FailureEvent(kind, t, (int(d["node"]),)))
            elif kind == KILL_GROUP:
                if "nodes" in d:
                    nodes = tuple(int(n) for n in d["nodes"])
                elif groups and d.get("group") in groups:
                    nodes = tuple(groups[d["group"]])
                else:
                    raise ConfigError(f"kill_group needs 'nodes' or a known 'group': {d}")
                events.append(FailureEvent(kind, t, nodes))
            elif kind == ADD_NODE:
                prof = NodeProfile.from_dict(d["profile"])
                events.append(FailureEvent(kind, t, (prof.node_id,), prof))
            else:
                raise ConfigError(f"unknown failure kind {kind!r}")
        return cls(events)

    def check(self, initial: set[int], duration: int) -> None:
        alive = set(initial)
        for e in self.events:
            if not 0 <= e.t <= duration:
                raise ConfigError(f"{e.kind} at t={e.t} outside the run (0..{duration})")
            if e.kind == ADD_NODE:
                if e.nodes[0] in alive:
                    raise ConfigError(f"add_node: node {e.nodes[0]} already alive at t={e.t}")
                alive.add(e.nodes[0])
                continue
            for n in e.nodes:
                if n not in alive:
                    raise ConfigError(f"{e.kind}: node {n} not alive at t={e.t}")
                alive.discard(n)


@dataclass
class SimConfig:
    nodes: list[NodeProfile]
    hormone: HormoneConfig = HormoneConfig()
    latency_ms: int = 1
    signal_bytes: int = 12  # 4-byte value + 8-byte routing header
    hormone_bytes: int = 16
    seed: int = 0
    duration: int = 1000
    join: str = FRESH
    snapshot_ms: int = 0  # 0 disables plant snapshots
    groups: dict[int, list[int]] = field(default_factory=dict)

    def __post_init__(self):
        self.check()

    def check(self) -> None:
        if self.duration <= 0:
            raise ConfigError("duration must be > 0")
        if not self.nodes:
            raise ConfigError("at least one node is required")
        ids = [p.node_id for p in self.nodes]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate node ids")
        if self.latency_ms < 0:
            raise ConfigError("latency must be >= 0")
        if self.join not in (FRESH, LATEST):
            raise ConfigError(f"join must be {FRESH!r} or {LATEST!r}")


def grid_cluster(groups: int, per_group: int, seed: int = 0, spread: float = 0.2) -> tuple[list[NodeProfile], dict[int, list[int]]]:
    """``groups`` boards with ``per_group`` nodes each, ids from 1.

    Capabilities vary by a small deterministic amount so that nodes are
    not all tied.
    """
    import random

    rng = random.Random(seed)
    profiles, layout = [], {}
    nid = 1
    for g in range(1, groups + 1):
        layout[g] = []
        for _ in range(per_group):
            caps = {a: round(1.0 - spread * rng.random(), 4) for a in AXES}
            profiles.append(NodeProfile(nid, caps))
            layout[g].append(nid)
            nid += 1
    return profiles, layout


@dataclass
class Scenario:
    name: str
    dna_path: Path
    config: SimConfig
    failures: FailureScript
    plant: dict
    outputs: dict = field(default_factory=dict)
    importance: dict = field(default_factory=dict)


def scenario_dirs() -> list[Path]:
    dirs = []
    env = os.environ.get(SCENARIO_DIR_ENV)
    if env:
        dirs.append(Path(env))
    dirs.append(Path(__file__).resolve().parent.parent / "scenarios")
    return dirs


def find_scenario(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    for d in scenario_dirs():
        for cand in (d / name, d / f"{name}.json"):
            if cand.exists():
                return cand
    raise FileNotFoundError(f"scenario {name!r} not found")


def _resolve_dna(ref: str, base: Path) -> Path:
    p = Path(ref)
    if p.is_absolute() and p.exists():
        return p
    for cand in (base / ref, Path(__file__).resolve().parent.parent / "corpus" / ref):
        if cand.exists():
            return cand
    raise FileNotFoundError(f"DNA file {ref!r} not found")


def load_scenario(path, seed: int | None = None, duration: int | None = None) -> Scenario:
    path = find_scenario(str(path))
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return scenario_from_dict(data, Path(path).parent, seed, duration)


def scenario_from_dict(data: dict, base: Path = Path("."), seed: int | None = None,
                       duration: int | None = None) -> Scenario:
    version = data.get("version")
    if version != SCENARIO_VERSION:
        raise ConfigError(f"unsupported scenario version {version!r}")
    seed = seed if seed is not None else int(data.get("seed", 0))
    if "cluster" in data:
        c = data["cluster"]
        profiles, groups = grid_cluster(int(c["groups"]), int(c["per_group"]), int(c.get("seed", 0)),
                                        float(c.get("spread", 0.2)))
    else:
        profiles = [NodeProfile.from_dict(d) for d in data["nodes"]]
        groups = {int(k): list(v) for k, v in data.get("groups", {}).items()}
    if "state" in data.get("cluster", {}):
        st = NodeState(**data["cluster"]["state"])
        profiles = [NodeProfile(p.node_id, p.capabilities, p.sensor_access, st) for p in profiles]
    transport = data.get("transport", {})
    config = SimConfig(
        nodes=profiles,
        hormone=HormoneConfig.from_dict(data.get("hormone")),
        latency_ms=int(transport.get("latency_ms", 1)),
        signal_bytes=int(transport.get("signal_bytes", 12)),
        hormone_bytes=int(transport.get("hormone_bytes", 16)),
        seed=seed,
        duration=int(duration if duration is not None else data["duration_ms"]),
        join=data.get("join", FRESH),
        snapshot_ms=int(data.get("snapshot_ms", 0)),
        groups=groups,
    )
    failures = FailureScript.from_list(data.get("failures", []), groups)
    if duration is not None:
        # a shortened run keeps only the failures that still fall inside it
        failures = FailureScript([e for e in failures.events if e.t <= config.duration])
    failures.check({p.node_id for p in profiles}, config.duration)
    return Scenario(
        name=data.get("name", "scenario"),
        dna_path=_resolve_dna(data["dna"], base),
        config=config,
        failures=failures,
        plant=data.get("plant", {}),
        outputs=data.get("outputs", {}),
        importance={int(k): int(v) for k, v in data.get("importance", {}).items()},
    )
