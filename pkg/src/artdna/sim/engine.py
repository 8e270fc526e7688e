"""Deterministic discrete-event simulation of a cluster of DNA processors.

Simulated time is integer milliseconds. At equal times events run in the
order failure, hormone cycle, signal delivery, element tick, plant
snapshot, then by insertion order, so a run is a pure function of its
inputs.

Hormone cycles are global and synchronous (every ``cycle_ms``). Signals
travel with a constant latency, also between elements on the same node;
a sender routes by its own node's view of who owns the target line.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

from ..ahs import AhsCluster, NodeProfile
from ..builder import RUNNING, ahs_tasks, segment, status_of, stuck_tasks
from ..dna.model import Dna
from ..elements.behavior import ElementState, Signal, init_state, on_input, on_tick
from ..elements.registry import schema_of
from ..plant import ResourceError, Vehicle
from .config import ADD_NODE, FailureScript, SimConfig
from .trace import TraceCollector, TraceRecord

P_FAILURE, P_CYCLE, P_DELIVER, P_TICK, P_SNAPSHOT = range(5)
STATS_EVERY_MS = 1000


@dataclass
class Instance:
    line: int
    node: int
    state: ElementState
    gen: int


@dataclass
class RunResult:
    records: list[TraceRecord]
    counters: dict = field(default_factory=dict)
    final_assignment: dict[int, int] = field(default_factory=dict)


class _NodeIO:
    """What an element sees of the world while running on one node."""

    def __init__(self, sim: "Simulation", node: int, line: int):
        self.sim, self.node, self.line = sim, node, line

    def read(self, resource, now):
        plant = self.sim.plant
        if plant is None:
            raise ResourceError(f"no plant bound for resource {resource}")
        return plant.read(resource, now, self.node)

    def write(self, resource, value, now):
        sim = self.sim
        if not math.isfinite(value):
            sim.trace.add(now, "warning", self.node, line=self.line + 1,
                          message=f"non-finite value {value!r} for resource {resource}, writing 0.0")
            value = 0.0
        if sim.plant is not None:
            sim.plant.write(resource, value, now, self.node)
        sim.trace.add(now, "actuate", self.node, line=self.line + 1, resource=resource, value=value)

    def build_complete(self):
        return self.sim.complete

    def log(self, line, channel, signal, now):
        src = signal.src[0] + 1 if signal.src else None
        self.sim.trace.add(now, "log", self.node, line=self.line + 1, channel=channel,
                           value=signal.value, src=src)

    def stop(self, line, now):
        self.sim.stop_requested = (now, self.line)

    def warn(self, message, now):
        self.sim.trace.add(now, "warning", self.node, line=self.line + 1, message=message)


class Simulation:
    def __init__(self, config: SimConfig, dna: Dna, plant: Vehicle | None = None,
                 failures: FailureScript | None = None, realtime: bool = False,
                 speed: float = 1.0):
        config.check()
        self.config = config
        self.dna = dna
        self.plant = plant
        self.failures = failures or FailureScript()
        self.failures.check({p.node_id for p in config.nodes}, config.duration)
        self.realtime = realtime
        self.speed = speed
        self.tasks = segment(dna)
        self.channels = [line.channels() for line in dna.lines]
        self.connected = [set() for _ in dna.lines]
        for line in dna.lines:
            for lk in line.links:
                self.connected[lk.line].add(lk.src_channel)
        self.trace = TraceCollector()
        self.cluster = AhsCluster([self._bind(p) for p in config.nodes], ahs_tasks(self.tasks),
                                  config.hormone)
        self.instances: dict[int, Instance] = {}
        self.owners: dict[int, int] = {}
        self.last_host: dict[int, int] = {}
        self.queue: list = []
        self.seq = 0
        self.gen = 0
        self.complete = False
        self.stop_requested = None
        self.counters = {"signals": 0, "messages": 0, "remote_messages": 0, "delivered": 0,
                         "dropped": 0, "no_route": 0, "hormones": 0}
        self._last_hormones = 0

    def _bind(self, profile: NodeProfile) -> NodeProfile:
        """Restrict a node's resource access to what the plant lets it see."""
        if self.plant is None:
            return profile
        visible = self.plant.map.accessible_from(profile.node_id)
        access = visible if profile.sensor_access is None else visible & profile.sensor_access
        return NodeProfile(profile.node_id, profile.capabilities, access, profile.state)

    def _push(self, t: int, prio: int, kind: str, *data) -> None:
        heapq.heappush(self.queue, (t, prio, self.seq, kind, data))
        self.seq += 1

    # element instances

    def _start(self, line: int, node: int, t: int) -> None:
        ln = self.dna.lines[line]
        schema = schema_of(ln.id)
        self.gen += 1
        st = init_state(ln.id, ln.params, line, self.connected[line] or None, self.config.join)
        self.instances[line] = Instance(line, node, st, self.gen)
        if schema.is_timed(ln.params):
            period = schema.period_of(ln.params)
            first = -(-t // period) * period
            self._push(first, P_TICK, "tick", line, self.gen)

    def _emit(self, inst: Instance, outputs, t: int) -> None:
        for ch, value in outputs:
            targets = self.channels[inst.line].get(ch, ())
            self.counters["signals"] += 1
            self.trace.add(t, "signal", inst.node, line=inst.line + 1, channel=ch, value=value)
            view = self.cluster.nodes[inst.node].owner
            for lk in targets:
                dest = view.get(lk.line)
                if dest is None:
                    self.counters["no_route"] += 1
                    self.counters["dropped"] += 1
                    self.trace.add(t, "drop", inst.node, line=inst.line + 1, channel=ch,
                                   to_line=lk.line + 1, to_channel=lk.src_channel, reason="no_route")
                    continue
                self.counters["messages"] += 1
                if dest != inst.node:
                    self.counters["remote_messages"] += 1
                sig = Signal(value, (inst.line, ch), (lk.line, lk.src_channel), t)
                self._push(t + self.config.latency_ms, P_DELIVER, "deliver", dest, sig, inst.node)

    def _deliver(self, t: int, dest: int, sig: Signal, sender: int) -> None:
        line, channel = sig.dst
        inst = self.instances.get(line)
        reason = None
        if dest not in self.cluster.alive:
            reason = "node_dead"
        elif inst is None or inst.node != dest:
            reason = "not_hosted"
        if reason:
            self.counters["dropped"] += 1
            self.trace.add(t, "drop", sender if sender in self.cluster.alive else None,
                           line=sig.src[0] + 1, channel=sig.src[1], to_line=line + 1,
                           to_channel=channel, to_node=dest, reason=reason)
            return
        self.counters["delivered"] += 1
        ln = self.dna.lines[line]
        _, out = on_input(inst.state, schema_of(ln.id), channel, sig, t, _NodeIO(self, dest, line))
        self._emit(inst, out, t)

    def _tick(self, t: int, line: int, gen: int) -> None:
        inst = self.instances.get(line)
        if inst is None or inst.gen != gen:
            return
        ln = self.dna.lines[line]
        schema = schema_of(ln.id)
        try:
            _, out = on_tick(inst.state, schema, t, _NodeIO(self, inst.node, line))
        except ResourceError as exc:
            self.trace.add(t, "warning", inst.node, line=line + 1, message=str(exc))
            out = []
        self._push(t + schema.period_of(ln.params), P_TICK, "tick", line, gen)
        self._emit(inst, out, t)

    # hormones and build state

    def _update_status(self, t: int, force: bool = False) -> None:
        running = set(self.instances)
        status = status_of(self.tasks, self.owners, self.cluster.alive, running,
                           stuck_tasks(self.tasks, [n.profile for n in self._live_nodes()]))
        complete = status.complete and self._routes_ok()
        if force or complete != self.complete:
            self.complete = complete
            self.trace.add(t, "build_status", complete=complete,
                           running=sum(1 for s, _ in status.states.values() if s == RUNNING),
                           tasks=len(self.tasks), stuck=[x + 1 for x in sorted(status.stuck)])

    def _live_nodes(self):
        return [self.cluster.nodes[n] for n in sorted(self.cluster.alive)]

    def _routes_ok(self) -> bool:
        """Every sender's owner view points at the node actually hosting each target."""
        for line, inst in self.instances.items():
            view = self.cluster.nodes[inst.node].owner
            for lk in self.dna.lines[line].links:
                target = self.instances.get(lk.line)
                if target is None or view.get(lk.line) != target.node:
                    return False
        return True

    def _cycle(self, t: int) -> None:
        events = self.cluster.step()
        for ev in events:
            payload = {"cycle": ev.cycle}
            if ev.task is not None:
                payload["line"] = ev.task + 1
            payload.update(ev.detail)
            self.trace.add(t, ev.kind, ev.node, **payload)
        new = self.cluster.assignment()
        for line in sorted(set(new) | set(self.owners)):
            old, cur = self.owners.get(line), new.get(line)
            if old == cur:
                continue
            if line in self.instances:
                del self.instances[line]
            if cur is None:
                continue
            prev = self.last_host.get(line)
            if prev is not None and prev != cur:
                self.trace.add(t, "relocate", cur, line=line + 1, **{"from": prev, "to": cur})
            self.last_host[line] = cur
            self._start(line, cur, t)
        self.owners = new
        self._update_status(t)
        if t // STATS_EVERY_MS != (t + self.config.hormone.cycle_ms) // STATS_EVERY_MS and self.tasks:
            sent = self.cluster.messages - self._last_hormones
            self._last_hormones = self.cluster.messages
            self.counters["hormones"] = self.cluster.messages
            self.trace.add(t, "hormone_stats", messages=sent, bytes=sent * self.config.hormone_bytes,
                           cycle=self.cluster.cycle)
        nxt = t + self.config.hormone.cycle_ms
        if nxt < self.config.duration:
            self._push(nxt, P_CYCLE, "cycle")

    def _failure(self, t: int, idx: int) -> None:
        ev = self.failures.events[idx]
        if ev.kind == ADD_NODE:
            self.cluster.add(self._bind(ev.profile))
            self.trace.add(t, "add_node", ev.profile.node_id)
            return
        hosted = []
        for n in ev.nodes:
            self.cluster.kill(n)
            for line, inst in sorted(self.instances.items()):
                if inst.node == n:
                    hosted.append(line + 1)
                    del self.instances[line]
        self.trace.add(t, "kill", nodes=list(ev.nodes), lines=sorted(hosted), event=ev.kind)
        self._update_status(t)

    def run(self) -> RunResult:
        cfg = self.config
        self._update_status(0, force=True)
        for i, ev in enumerate(self.failures.events):
            self._push(ev.t, P_FAILURE, "failure", i)
        self._push(0, P_CYCLE, "cycle")
        if cfg.snapshot_ms and self.plant is not None:
            self._push(0, P_SNAPSHOT, "snapshot")
        wall0 = time.monotonic()
        while self.queue:
            t, _, _, kind, data = heapq.heappop(self.queue)
            if t >= cfg.duration:
                break
            if self.realtime:
                delay = wall0 + t / (1000.0 * self.speed) - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
            if kind == "cycle":
                self._cycle(t)
            elif kind == "deliver":
                self._deliver(t, *data)
            elif kind == "tick":
                self._tick(t, *data)
            elif kind == "failure":
                self._failure(t, *data)
            elif kind == "snapshot":
                self.plant.advance_to(t)
                self.trace.add(t, "plant", **self.plant.snapshot())
                self._push(t + cfg.snapshot_ms, P_SNAPSHOT, "snapshot")
            if self.stop_requested:
                st, line = self.stop_requested
                self.trace.add(st, "stop", line=line + 1)
                break
        end = cfg.duration if not self.stop_requested else self.stop_requested[0]
        self.counters["hormones"] = self.cluster.messages
        self.trace.add(end, "build_status", complete=self.complete, final=True, duration=end,
                       tasks=len(self.tasks), signal_bytes=cfg.signal_bytes,
                       hormone_bytes=cfg.hormone_bytes, **self.counters)
        return RunResult(self.trace.records, dict(self.counters), dict(self.owners))


def run(config: SimConfig, dna: Dna, plant: Vehicle | None = None,
        failures: FailureScript | None = None, realtime: bool = False) -> RunResult:
    return Simulation(config, dna, plant, failures, realtime).run()


def run_scenario(scenario, realtime: bool = False, speed: float = 1.0) -> RunResult:
    """Load the scenario's DNA and plant and run it."""
    from ..dna import load
    from ..plant import make_plant

    dna = load(scenario.dna_path)
    plant = make_plant(scenario.plant, scenario.config.seed) if scenario.plant else None
    return Simulation(scenario.config, dna, plant, scenario.failures, realtime, speed).run()
