"""Extraction and down-sampling of a large cluster trace onto the testbed.

Stages, in pipeline order: cut a time window, rank users by scheduled
tasks, keep the top users, keep only well-behaved machines, map machine
types onto testbed types, fold many trace machines onto each testbed node,
and finally turn the surviving submissions into simulator tasks. Traces
without machine information skip the three machine stages.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from heats.cluster import ClusterConfig, GovernorMode, Task
from heats.errors import IncompleteRecord, NoTargetNode, NotBijective, UnmappedType
from heats.trace import TraceEvent, TraceKind

TEN_DAYS_S = 10 * 86400.0
TWELVE_HOURS_S = 12 * 3600.0
TASK_MACHINE_KINDS = frozenset({TraceKind.SCHEDULE, TraceKind.FINISH, TraceKind.EVICT,
                                TraceKind.USAGE})


def extract_window(events: Iterable[TraceEvent], offset_s: float,
                   duration_s: float) -> list[TraceEvent]:
    """Events in [offset, offset + duration), rebased to start at zero."""
    if offset_s < 0 or duration_s < 0:
        raise ValueError("offset and duration must be non-negative")
    end = offset_s + duration_s
    kept = [(e.time_s, i, e) for i, e in enumerate(events) if offset_s <= e.time_s < end]
    kept.sort(key=lambda x: (x[0], x[1]))
    return [replace(e, time_s=e.time_s - offset_s) for _, _, e in kept]


def top_users(events: Iterable[TraceEvent], k: int) -> list[str]:
    if k < 1:
        raise ValueError("k must be at least 1")
    counts = Counter(e.user_id for e in events if e.kind is TraceKind.SCHEDULE and e.user_id)
    return [u for u, _ in sorted(counts.items(), key=lambda uc: (-uc[1], uc[0]))[:k]]


def filter_by_users(events: Iterable[TraceEvent], users: Iterable[str]) -> list[TraceEvent]:
    users = set(users)
    return [e for e in events if e.is_machine_event or e.user_id in users]


def eligible_machines(events: Iterable[TraceEvent],
                      window: Optional[tuple] = None) -> set[str]:
    """Machines that were stable in the window, ran a task and reported usage."""
    if window is not None:
        events = extract_window(events, *window)
    touched, scheduled, used = set(), set(), set()
    for e in events:
        if not e.machine_id:
            continue
        if e.is_machine_event:
            touched.add(e.machine_id)
        elif e.kind is TraceKind.SCHEDULE:
            scheduled.add(e.machine_id)
        elif e.kind is TraceKind.USAGE:
            used.add(e.machine_id)
    return (scheduled & used) - touched


def restrict_to_machines(events: Iterable[TraceEvent], machines: set) -> list[TraceEvent]:
    """Drop machine events and task records placed outside ``machines``.

    A submission survives only if its task was scheduled on a kept machine.
    """
    events = list(events)
    placed = {e.task_id for e in events
              if e.kind is TraceKind.SCHEDULE and e.machine_id in machines}
    out = []
    for e in events:
        if e.is_machine_event:
            continue
        if e.kind is TraceKind.SUBMIT:
            if e.task_id in placed:
                out.append(e)
        elif e.machine_id in machines:
            out.append(e)
    return out


def machine_types(events: Iterable[TraceEvent], until_s: float = math.inf) -> dict:
    """Last known type per machine from add/update events strictly before ``until_s``."""
    types = {}
    for e in sorted((e for e in events if e.time_s < until_s), key=lambda e: e.time_s):
        if e.kind in (TraceKind.MACHINE_ADD, TraceKind.MACHINE_UPDATE) and e.machine_type:
            types[e.machine_id] = e.machine_type
        elif e.kind is TraceKind.MACHINE_REMOVE:
            types.pop(e.machine_id, None)
    return types


def inventory(machines: Iterable[str], types: dict) -> list[TraceEvent]:
    """One machine_add at t=0 per machine, carrying its type (empty if unknown)."""
    return [TraceEvent(0.0, TraceKind.MACHINE_ADD, machine_id=m, machine_type=types.get(m, ""))
            for m in sorted(machines)]


def map_machine_types(events: Iterable[TraceEvent], type_map: dict) -> list[TraceEvent]:
    targets = list(type_map.values())
    if len(set(targets)) != len(targets):
        raise NotBijective("machine type map sends two trace types to the same testbed type")
    out = []
    for e in events:
        if e.machine_type:
            if e.machine_type not in type_map:
                raise UnmappedType(e.machine_type)
            e = replace(e, machine_type=type_map[e.machine_type])
        out.append(e)
    return out


def fold_machines(events: Sequence[TraceEvent],
                  testbed_nodes: Sequence[tuple]) -> tuple[list[TraceEvent], dict]:
    """Assign each trace machine to a testbed node of its type and rewrite ids.

    Machines go in descending order of scheduled tasks, each to the node of
    its type with the smallest load so far (load = scheduled tasks already
    folded onto it); ties go to the smaller machine or node id.
    """
    types = {}
    for e in events:
        if e.is_machine_event and e.machine_type:
            types[e.machine_id] = e.machine_type
    counts = Counter(e.machine_id for e in events if e.kind is TraceKind.SCHEDULE)
    machines = set(types) | {e.machine_id for e in events
                             if e.kind in TASK_MACHINE_KINDS and e.machine_id}
    by_type = {}
    for node_id, type_id in testbed_nodes:
        by_type.setdefault(type_id, []).append(node_id)
    load = {node_id: 0 for node_id, _ in testbed_nodes}
    mapping = {}
    for m in sorted(machines, key=lambda m: (-counts[m], m)):
        t = types.get(m, "")
        if not by_type.get(t):
            raise NoTargetNode(t)
        target = min(by_type[t], key=lambda n: (load[n], n))
        load[target] += counts[m]
        mapping[m] = target
    out, seen = [], set()
    for e in events:
        if e.machine_id:
            e = replace(e, machine_id=mapping[e.machine_id])
        if e.is_machine_event:
            key = (e.time_s, e.kind, e.machine_id, e.machine_type)
            if key in seen:
                continue
            seen.add(key)
        out.append(e)
    return out, mapping


@dataclass(frozen=True)
class TraceTaskDefaults:
    ref_cores: float
    ref_mem_mib: int
    ref_per_iteration_s: float
    default_iterations: int = 750
    min_cpu: float = 0.01

    @classmethod
    def from_cluster(cls, cluster: ClusterConfig, **kw) -> "TraceTaskDefaults":
        """Scale against the largest testbed machine (most cores, then most memory)."""
        ref = max((cluster.specs[t] for t in cluster.type_ids()),
                  key=lambda s: (s.cores, s.mem_mib, s.type_id))
        return cls(ref.cores, ref.mem_mib, ref.per_iteration_s[GovernorMode.PERFORMANCE], **kw)


def tasks_from_trace(events: Sequence[TraceEvent], defaults: TraceTaskDefaults) -> list[Task]:
    finish = {}
    for e in events:
        if e.kind is TraceKind.FINISH and e.task_id not in finish:
            finish[e.task_id] = e.time_s
    tasks, seen = [], set()
    for i, e in enumerate(events):
        if e.kind is not TraceKind.SUBMIT or e.task_id in seen:
            continue
        if e.cpu_req is None or e.mem_req is None:
            raise IncompleteRecord(f"submit of task {e.task_id!r} lacks resource requests")
        seen.add(e.task_id)
        iterations = defaults.default_iterations
        if e.task_id in finish and finish[e.task_id] > e.time_s:
            iterations = max(1, round((finish[e.task_id] - e.time_s) / defaults.ref_per_iteration_s))
        tasks.append((e.time_s, i, Task(
            e.task_id, e.time_s, max(e.cpu_req * defaults.ref_cores, defaults.min_cpu),
            max(1, round(e.mem_req * defaults.ref_mem_mib)), iterations, user_id=e.user_id)))
    tasks.sort(key=lambda x: (x[0], x[1]))
    return [t for _, _, t in tasks]


@dataclass
class SampleResult:
    events: list
    tasks: list
    users: list
    machines: Optional[set] = None
    mapping: Optional[dict] = None
    stage_counts: dict = field(default_factory=dict)


def sample_trace(events: Sequence[TraceEvent], cluster: ClusterConfig,
                 offset_s: float = TEN_DAYS_S, duration_s: float = TWELVE_HOURS_S,
                 top_k: int = 10, type_map: Optional[dict] = None,
                 skip_machine_steps: bool = False,
                 defaults: Optional[TraceTaskDefaults] = None) -> SampleResult:
    """Run the full pipeline; ``type_map`` defaults to the identity on testbed types."""
    events = list(events)
    counts = {"input": len(events)}
    window = extract_window(events, offset_s, duration_s)
    counts["window"] = len(window)
    users = top_users(window, top_k)
    kept = filter_by_users(window, users)
    counts["filter"] = len(kept)
    machines = mapping = None
    if not skip_machine_steps:
        machines = eligible_machines(kept)
        known = machine_types(events, offset_s)
        kept = inventory(machines, known) + restrict_to_machines(kept, machines)
        counts["eligible"] = len(kept)
        if type_map is None:
            type_map = {t: t for t in cluster.specs}
        kept = map_machine_types(kept, type_map)
        kept, mapping = fold_machines(kept, [(n.node_id, n.type_id) for n in cluster.nodes])
        counts["fold"] = len(kept)
    if defaults is None:
        defaults = TraceTaskDefaults.from_cluster(cluster)
    tasks = tasks_from_trace(kept, defaults)
    counts["tasks"] = len(tasks)
    return SampleResult(kept, tasks, users, machines, mapping, counts)
