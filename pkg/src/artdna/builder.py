"""From a DNA to tasks, hormone setup and a running assignment.

One DNA line becomes one task. Every node derives its own eager values
for all tasks from the same DNA; the hormone cycles then settle who runs
what.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .ahs import (
    DEFAULT_CONFIG,
    DEFAULT_TABLE,
    AhsCluster,
    AhsTask,
    HormoneConfig,
    NodeProfile,
    SuitabilityTable,
    base_suitability,
    state_factor,
)
from .dna.model import Dna, Edge, topology
from .dna.validate import errors, validate

UNASSIGNED, CLAIMED, RUNNING = "unassigned", "claimed", "running"


class BuildError(ValueError):
    def __init__(self, message: str, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class TaskSpec:
    task_id: int
    element_id: int
    params: tuple
    in_links: tuple[Edge, ...] = ()
    out_links: tuple[Edge, ...] = ()
    importance: int | None = None

    def neighbors(self) -> frozenset[int]:
        lines = {e.src for e in self.in_links} | {e.dst for e in self.out_links}
        lines.discard(self.task_id)
        return frozenset(lines)


def segment(dna: Dna, check: bool = True) -> list[TaskSpec]:
    if check:
        bad = errors(validate(dna))
        if bad:
            raise BuildError(f"invalid DNA: {bad[0]}", bad)
    topo = topology(dna)
    return [
        TaskSpec(i, line.id, line.params, tuple(topo.in_edges(i)), tuple(topo.out_edges(i)))
        for i, line in enumerate(dna.lines)
    ]


@dataclass(frozen=True)
class HormoneSetup:
    node_id: int
    eager: tuple[float, ...]
    neighbors: tuple[frozenset, ...]


def derive_hormones(tasks: list[TaskSpec], profile: NodeProfile,
                    config: HormoneConfig = DEFAULT_CONFIG,
                    table: SuitabilityTable = DEFAULT_TABLE) -> HormoneSetup:
    factor = state_factor(profile.state, config)
    eager = tuple(base_suitability(t.element_id, t.params, profile, table) * factor for t in tasks)
    return HormoneSetup(profile.node_id, eager, tuple(t.neighbors() for t in tasks))


def ahs_tasks(tasks: list[TaskSpec]) -> list[AhsTask]:
    return [AhsTask(t.task_id, t.element_id, t.params, t.neighbors()) for t in tasks]


@dataclass
class BuildStatus:
    states: dict[int, tuple[str, int | None]] = field(default_factory=dict)
    stuck: frozenset[int] = frozenset()
    cycle: int = 0

    @property
    def complete(self) -> bool:
        return all(s == RUNNING for s, _ in self.states.values())

    def to_dict(self) -> dict:
        return {
            "cycle": self.cycle,
            "complete": self.complete,
            "stuck": [t + 1 for t in sorted(self.stuck)],
            "tasks": {str(t + 1): {"state": s, "node": n} for t, (s, n) in sorted(self.states.items())},
        }


def stuck_tasks(tasks: list[TaskSpec], profiles: list[NodeProfile],
                table: SuitabilityTable = DEFAULT_TABLE) -> frozenset[int]:
    """Tasks no node can run (zero suitability everywhere)."""
    return frozenset(
        t.task_id for t in tasks
        if all(base_suitability(t.element_id, t.params, p, table) <= 0 for p in profiles)
    )


def status_of(tasks: list[TaskSpec], assignment: dict[int, int], live: set[int],
              running: set[int] | None = None, stuck: frozenset = frozenset(),
              cycle: int = 0) -> BuildStatus:
    """Build state of every task.

    A claimed task counts as running once it is started (``running``;
    ``None`` means claiming is enough) and every task it links to or from
    has a live owner, so its signals have a route.
    """
    states = {}
    for t in tasks:
        node = assignment.get(t.task_id)
        if node is None or node not in live:
            states[t.task_id] = (UNASSIGNED, None)
            continue
        started = running is None or t.task_id in running
        routed = all(assignment.get(e.dst) in live for e in t.out_links) and all(
            assignment.get(e.src) in live for e in t.in_links
        )
        states[t.task_id] = (RUNNING if started and routed else CLAIMED, node)
    return BuildStatus(states, stuck, cycle)


def build(dna: Dna, cluster, config: HormoneConfig = DEFAULT_CONFIG,
          max_cycles: int | None = None) -> Iterator[BuildStatus]:
    """Drive hormone cycles until the DNA is fully built; yields one status per cycle.

    ``cluster`` is an :class:`AhsCluster` built for this DNA or a list of
    node profiles. Stops after the first complete status, or when only
    stuck tasks remain, or after ``max_cycles``.
    """
    tasks = segment(dna)
    if not isinstance(cluster, AhsCluster):
        cluster = AhsCluster(list(cluster), ahs_tasks(tasks), config)
    profiles = [cluster.nodes[n].profile for n in sorted(cluster.alive)]
    stuck = stuck_tasks(tasks, profiles, cluster.table)
    limit = max_cycles if max_cycles is not None else 2 * len(tasks) + config.timeout_cycles + 2
    for _ in range(limit):
        cluster.step()
        status = status_of(tasks, cluster.assignment(), cluster.alive, stuck=stuck, cycle=cluster.cycle)
        yield status
        if status.complete:
            return
        unassigned = {t for t, (s, _) in status.states.items() if s == UNASSIGNED}
        if stuck and unassigned <= stuck:
            return


def importance_backtrack(dna: Dna, seeds: dict[int, int]) -> dict[int, int]:
    """Spread importance from seeded lines (usually actors) back to their inputs.

    A line's importance is the largest seed among the lines it feeds,
    directly or transitively, or its own seed. Line indices are 0-based.
    """
    n = len(dna.lines)
    for line, value in seeds.items():
        if not 0 <= line < n:
            raise KeyError(f"seed on non-existent line {line}")
        if value < 0:
            raise ValueError(f"importance must be >= 0, got {value}")
    preds: list[list[int]] = [[] for _ in range(n)]
    for i, line in enumerate(dna.lines):
        for lk in line.links:
            if 0 <= lk.line < n:
                preds[lk.line].append(i)
    result = [0] * n
    done = [False] * n
    # highest seeds first: the first visit of a line fixes its final value
    for line, value in sorted(seeds.items(), key=lambda kv: (-kv[1], kv[0])):
        if done[line]:
            continue
        queue = deque([line])
        done[line] = True
        result[line] = value
        while queue:
            cur = queue.popleft()
            for p in preds[cur]:
                if not done[p]:
                    done[p] = True
                    result[p] = value
                    queue.append(p)
    return dict(enumerate(result))


def importance_json(importance: dict[int, int]) -> str:
    """JSON object keyed by 1-based line number."""
    return json.dumps({str(k + 1): v for k, v in sorted(importance.items())}, indent=2)
