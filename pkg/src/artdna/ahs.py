"""Hormone-based decentralized task allocation.

Every node bids for every unclaimed task with an *eager* value (its
suitability), announces and keeps its claims alive with *suppressor*
heartbeats, and pulls tasks that cooperate with its own towards itself
with *accelerators*. Nodes run in synchronous cycles; a node only sees
the hormones sent to it in the previous cycle.

Claim rule: a node claims an unclaimed task when its own bid from the
previous cycle is strictly the highest bid for that task (ties go to the
lowest node id). A node claims at most one task per cycle; the claim
raises its effective load, which lowers its later bids.

A task whose owner sends no heartbeat for ``timeout_cycles`` consecutive
cycles is orphaned and bid for again.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources

from .elements.registry import schema_of

EAGER, SUPPRESSOR, ACCELERATOR = "eager", "suppressor", "accelerator"
AXES = ("arithmetic", "memory", "io")
SENSOR_ID, ACTOR_ID = 500, 600


@dataclass(frozen=True)
class HormoneConfig:
    cycle_ms: int = 25
    timeout_cycles: int = 3  # K
    recovery_slack: int = 2  # C in the (k + K + C) recovery bound
    accel_bonus: float = 0.1
    load_per_task: float = 0.25
    w_load: float = 1.0
    w_energy: float = 1.0
    w_temperature: float = 1.0
    migrate_margin: float | None = None  # None: claimed tasks never move while their owner lives

    def __post_init__(self):
        if self.cycle_ms <= 0 or self.timeout_cycles < 1:
            raise ValueError("cycle_ms must be > 0 and timeout_cycles >= 1")

    def recovery_bound(self, k: int) -> int:
        """Upper bound in cycles from a node loss until k orphaned tasks run again."""
        return k + self.timeout_cycles + self.recovery_slack

    @classmethod
    def from_dict(cls, d: dict | None) -> "HormoneConfig":
        return cls(**(d or {}))


DEFAULT_CONFIG = HormoneConfig()


@dataclass(frozen=True)
class NodeState:
    load: float = 0.0
    energy: float = 1.0
    temperature: float = 0.0

    def __post_init__(self):
        for name in ("load", "energy", "temperature"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class NodeProfile:
    """A node's capabilities and current state.

    ``sensor_access`` lists the resource ids the node can reach; ``None``
    means every resource.
    """

    node_id: int
    capabilities: dict = field(default_factory=lambda: {a: 1.0 for a in AXES})
    sensor_access: frozenset | None = None
    state: NodeState = NodeState()

    def __post_init__(self):
        if any(v < 0 for v in self.capabilities.values()):
            raise ValueError("capability scores must be >= 0")
        if self.sensor_access is not None:
            object.__setattr__(self, "sensor_access", frozenset(self.sensor_access))

    def can_access(self, resource: int) -> bool:
        return self.sensor_access is None or resource in self.sensor_access

    @classmethod
    def from_dict(cls, d: dict) -> "NodeProfile":
        access = d.get("sensor_access")
        return cls(
            int(d["node_id"]),
            dict(d.get("capabilities", {a: 1.0 for a in AXES})),
            frozenset(access) if access is not None else None,
            NodeState(**d.get("state", {})),
        )


@dataclass(frozen=True)
class Hormone:
    kind: str
    task: int
    value: float
    origin: int
    cycle: int


@lru_cache(maxsize=None)
def _default_table() -> dict:
    text = resources.files("artdna.data").joinpath("suitability.json").read_text()
    return json.loads(text)


class SuitabilityTable:
    """Per element id weights over the capability axes."""

    def __init__(self, data: dict | None = None):
        data = data or _default_table()
        self.default = dict(data["default"])
        self.weights = {int(k): dict(v) for k, v in data["weights"].items()}

    def weights_for(self, element_id: int) -> dict:
        return self.weights.get(element_id, self.default)

    def base(self, element_id: int, capabilities: dict) -> float:
        w = self.weights_for(element_id)
        return sum(w.get(a, 0.0) * capabilities.get(a, 0.0) for a in w)


DEFAULT_TABLE = SuitabilityTable()


def state_factor(state: NodeState, config: HormoneConfig = DEFAULT_CONFIG) -> float:
    f = (
        (1.0 - config.w_load * state.load)
        * (1.0 - config.w_energy * (1.0 - state.energy))
        * (1.0 - config.w_temperature * state.temperature)
    )
    return max(0.0, f)


def base_suitability(element_id: int, params, profile: NodeProfile,
                     table: SuitabilityTable = DEFAULT_TABLE) -> float:
    schema_of(element_id)  # raises UnknownElementError
    if element_id in (SENSOR_ID, ACTOR_ID) and params and not profile.can_access(int(params[0])):
        return 0.0
    return table.base(element_id, profile.capabilities)


def compute_eager(element_id: int, params, profile: NodeProfile,
                  config: HormoneConfig = DEFAULT_CONFIG,
                  table: SuitabilityTable = DEFAULT_TABLE) -> float:
    return base_suitability(element_id, params, profile, table) * state_factor(profile.state, config)


def effective_state(state: NodeState, claimed: int, config: HormoneConfig) -> NodeState:
    """Each claimed task takes a share of the remaining idle capacity."""
    load = 1.0 - (1.0 - state.load) / (1.0 + config.load_per_task * claimed)
    return replace(state, load=min(1.0, max(0.0, load)))


@dataclass(frozen=True)
class AhsTask:
    task_id: int
    element_id: int
    params: tuple
    neighbors: frozenset = frozenset()


@dataclass
class Event:
    """Protocol event for the trace: claim, release, orphan or discover."""

    kind: str
    node: int
    task: int | None = None
    cycle: int = 0
    detail: dict = field(default_factory=dict)


class AhsNode:
    def __init__(self, profile: NodeProfile, tasks: list[AhsTask],
                 config: HormoneConfig = DEFAULT_CONFIG, table: SuitabilityTable = DEFAULT_TABLE):
        self.profile = profile
        self.node_id = profile.node_id
        self.tasks = tasks
        self.config = config
        self.base = [base_suitability(t.element_id, t.params, profile, table) for t in tasks]
        self.owner: dict[int, int] = {}  # task -> owner node, as believed here
        self.silent: dict[int, int] = {}
        self.claimed: set[int] = set()
        self.peers: set[int] = {self.node_id}
        self.accel: dict[int, float] = {}
        self.bids: dict[int, dict[int, float]] = {}
        self.owner_value: dict[int, float] = {}
        self._factor_key = None
        self._factor_val = 0.0

    def _factor(self) -> float:
        key = (len(self.claimed), self.profile.state)
        if self._factor_key != key:
            st = effective_state(self.profile.state, len(self.claimed), self.config)
            self._factor_key, self._factor_val = key, state_factor(st, self.config)
        return self._factor_val

    def eager(self, task: int) -> float:
        return self.base[task] * self._factor()

    def set_state(self, state: NodeState) -> None:
        self.profile = replace(self.profile, state=state)

    def _wins(self, value: float, origin: int, current: tuple[float, int] | None) -> bool:
        return current is None or (value, -origin) > (current[0], -current[1])

    def detect_change(self, inbox: list[Hormone], cycle: int) -> list[Event]:
        """Heartbeat bookkeeping: discover peers, track owners, orphan silent tasks."""
        events = []
        heard: dict[int, tuple[float, int]] = {}
        released: set[int] = set()
        for h in inbox:
            if h.origin not in self.peers:
                self.peers.add(h.origin)
                events.append(Event("discover", self.node_id, None, cycle, {"peer": h.origin}))
            if h.kind != SUPPRESSOR:
                continue
            if h.value <= 0:
                released.add(h.task)
            elif self._wins(h.value, h.origin, heard.get(h.task)):
                heard[h.task] = (h.value, h.origin)
        for task in released:
            if task not in heard and self.owner.get(task) not in (None, self.node_id):
                del self.owner[task]
                self.silent.pop(task, None)
        for task, (value, origin) in heard.items():
            if origin == self.node_id:
                continue
            if task in self.claimed:
                # two claimants: the stronger heartbeat keeps the task
                mine = (self.eager(task) + self.accel.get(task, 0.0), self.node_id)
                if self._wins(value, origin, mine):
                    self.claimed.discard(task)
                    events.append(Event("release", self.node_id, task, cycle, {"to": origin}))
                else:
                    continue
            if self.owner.get(task) != origin:
                self.owner[task] = origin
            self.silent[task] = 0
            self.owner_value[task] = value
        for task in list(self.owner):
            owner = self.owner[task]
            if owner == self.node_id or task in heard:
                continue
            self.silent[task] = self.silent.get(task, 0) + 1
            if self.silent[task] >= self.config.timeout_cycles:
                del self.owner[task]
                del self.silent[task]
                self.owner_value.pop(task, None)
                events.append(Event("orphan", self.node_id, task, cycle, {"owner": owner}))
        return events

    def hormone_cycle(self, inbox: list[Hormone], cycle: int) -> tuple[list[tuple[int | None, Hormone]], list[Event]]:
        """Process one cycle. Returns (``(dest, hormone)`` emissions, events); dest None = broadcast."""
        events = self.detect_change(inbox, cycle)
        self.accel = {}
        self.bids = {}
        for h in inbox:
            if h.kind == ACCELERATOR:
                self.accel[h.task] = self.accel.get(h.task, 0.0) + h.value
            elif h.kind == EAGER and h.task >= 0:
                self.bids.setdefault(h.task, {})[h.origin] = h.value

        migrating = self.config.migrate_margin is not None
        if migrating:
            for task in sorted(self.claimed):
                mine = self.eager(task) + self.accel.get(task, 0.0)
                rivals = [v for o, v in self.bids.get(task, {}).items() if o != self.node_id]
                if rivals and max(rivals) > mine + self.config.migrate_margin:
                    self.claimed.discard(task)
                    del self.owner[task]
                    events.append(Event("release", self.node_id, task, cycle, {"reason": "migrate"}))

        out: list[tuple[int | None, Hormone]] = []
        best = None
        for task, bids in self.bids.items():
            if task in self.owner or task in self.claimed:
                continue
            mine = bids.get(self.node_id)
            if mine is None or mine <= 0:
                continue
            top = max(bids.items(), key=lambda kv: (kv[1], -kv[0]))
            if top[0] != self.node_id:
                continue
            if best is None or (mine, -task) > (best[1], -best[0]):
                best = (task, mine)
        if best is not None:
            task = best[0]
            self.claimed.add(task)
            self.owner[task] = self.node_id
            events.append(Event("claim", self.node_id, task, cycle, {"bid": best[1]}))
            # own accelerators act on this cycle's bids already
            for n in self.tasks[task].neighbors:
                self.accel[n] = self.accel.get(n, 0.0) + self.config.accel_bonus

        for task in sorted(self.claimed):
            value = self.eager(task) + self.accel.get(task, 0.0)
            out.append((None, Hormone(SUPPRESSOR, task, max(value, 1e-9), self.node_id, cycle)))
            for n in sorted(self.tasks[task].neighbors):
                out.append((self.node_id, Hormone(ACCELERATOR, n, self.config.accel_bonus, self.node_id, cycle)))
        for ev in events:
            if ev.kind == "release" and ev.detail.get("reason") == "migrate":
                out.append((None, Hormone(SUPPRESSOR, ev.task, 0.0, self.node_id, cycle)))
        bid_any = False
        for task in range(len(self.tasks)):
            if task in self.claimed:
                continue
            if task in self.owner and not migrating:
                continue
            value = self.eager(task)
            if value <= 0:
                continue
            value += self.accel.get(task, 0.0)
            out.append((None, Hormone(EAGER, task, value, self.node_id, cycle)))
            bid_any = True
        if not bid_any:
            # presence beacon so peers learn about this node
            out.append((None, Hormone(EAGER, -1, 0.0, self.node_id, cycle)))
        return out, events


class AhsCluster:
    """Synchronous driver: all live nodes step once per cycle, hormones arrive next cycle."""

    def __init__(self, profiles: list[NodeProfile], tasks: list[AhsTask],
                 config: HormoneConfig = DEFAULT_CONFIG, table: SuitabilityTable = DEFAULT_TABLE):
        ids = [p.node_id for p in profiles]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")
        self.tasks = tasks
        self.config = config
        self.table = table
        self.nodes: dict[int, AhsNode] = {p.node_id: AhsNode(p, tasks, config, table) for p in profiles}
        self.alive: set[int] = set(self.nodes)
        self.inbox: dict[int, list[Hormone]] = {n: [] for n in self.nodes}
        self.cycle = 0
        self.messages = 0

    def kill(self, node_id: int) -> None:
        if node_id not in self.alive:
            raise KeyError(f"node {node_id} is not alive")
        self.alive.discard(node_id)
        self.inbox[node_id] = []

    def add(self, profile: NodeProfile) -> None:
        if profile.node_id in self.nodes and profile.node_id in self.alive:
            raise ValueError(f"node {profile.node_id} already present")
        self.nodes[profile.node_id] = AhsNode(profile, self.tasks, self.config, self.table)
        self.alive.add(profile.node_id)
        self.inbox[profile.node_id] = []

    def step(self) -> list[Event]:
        events: list[Event] = []
        broadcast: list[Hormone] = []
        direct: dict[int, list[Hormone]] = {n: [] for n in self.alive}
        live = sorted(self.alive)
        for nid in live:
            emissions, evs = self.nodes[nid].hormone_cycle(self.inbox[nid], self.cycle)
            events.extend(evs)
            for dest, h in emissions:
                if dest is None:
                    broadcast.append(h)
                    self.messages += len(live)
                elif dest in self.alive:
                    direct[dest].append(h)
                    self.messages += 1
        # every live node sees the same broadcast sequence, own hormones included
        self.inbox = {n: broadcast + direct[n] if n in direct else [] for n in self.nodes}
        self.cycle += 1
        return events

    def assignment(self) -> dict[int, int]:
        """Global observer view: task -> owning live node (from the owners' own claims)."""
        table = {}
        for nid in sorted(self.alive):
            for task in self.nodes[nid].claimed:
                table.setdefault(task, nid)
        return table

    def double_claims(self) -> dict[int, list[int]]:
        seen: dict[int, list[int]] = {}
        for nid in sorted(self.alive):
            for task in self.nodes[nid].claimed:
                seen.setdefault(task, []).append(nid)
        return {t: ns for t, ns in seen.items() if len(ns) > 1}

    def claimable(self) -> set[int]:
        return {t for t in range(len(self.tasks))
                if any(self.nodes[n].base[t] > 0 and self.nodes[n].eager(t) > 0 for n in self.alive)}

    def converged(self) -> bool:
        return set(self.assignment()) >= self.claimable() and not self.double_claims()

    def run_until_converged(self, max_cycles: int) -> int | None:
        """Step until every claimable task has exactly one owner; returns cycles used."""
        start = self.cycle
        while self.cycle - start < max_cycles:
            self.step()
            if self.converged():
                return self.cycle - start
        return None


@dataclass
class AssignmentTable:
    owners: dict[int, tuple[int, int]] = field(default_factory=dict)  # task -> (node, since_cycle)

    def update(self, assignment: dict[int, int], cycle: int) -> list[tuple[int, int | None, int]]:
        """Apply a new global view; returns (task, old_node, new_node) for every change."""
        changes = []
        for task, node in sorted(assignment.items()):
            old = self.owners.get(task)
            if old is None or old[0] != node:
                changes.append((task, old[0] if old else None, node))
                self.owners[task] = (node, cycle)
        for task in sorted(set(self.owners) - set(assignment)):
            changes.append((task, self.owners.pop(task)[0], None))
        return changes

    def claimed_by(self, node: int) -> set[int]:
        return {t for t, (n, _) in self.owners.items() if n == node}
