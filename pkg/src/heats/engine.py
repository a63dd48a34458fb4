"""Discrete-event simulation of a trace on a heterogeneous cluster.

Execution follows the ground-truth machine model exactly: a running task
progresses at ``1 / per_iteration_s`` work units per second and draws its
node's active power, so every quantity is integrated in closed form between
events. Idle power is charged to every node for the whole run.
"""

from __future__ import annotations

import csv
import enum
import heapq
import json
import math
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from heats.cluster import ClusterConfig, Node, Task, TaskState, TradeoffWeights, fits
from heats.errors import ConfigError, InvalidTimeline, MigrationRejected, UnsatisfiableTask
from heats.predictor import PredictorSet, probe_and_train
from heats.scheduler import (Action, heats_placer, k8s_placer, reschedule,
                             schedule)

HEATS = "heats"
K8S = "k8s_baseline"
PERCENTILES = (0, 25, 50, 75, 100)


class EventKind(enum.IntEnum):
    # value is the tie-break priority at equal timestamps
    TASK_COMPLETION = 0
    TASK_ARRIVAL = 1
    SCHEDULING_TICK = 2
    RESCHEDULE_TICK = 3
    FORCED_MIGRATION = 4
    MONITOR_TICK = 5


@dataclass(frozen=True, order=True)
class SimEvent:
    time_s: float
    kind: EventKind
    seq: int
    payload: object = field(default=None, compare=False)


@dataclass(frozen=True)
class ForcedMigration:
    at_time_s: float
    task_id: str
    to_node: str


@dataclass(frozen=True)
class PolicyConfig:
    scheduler: str = HEATS
    h_value: float = 0.5
    epsilon: float = 0.0
    reschedule_interval_s: float = 60.0
    scheduling_interval_s: float = 1.0
    monitor_interval_s: float = 1.0
    migration_overhead_s: float = 0.0
    forced_migrations: tuple = ()
    label: str = ""

    def __post_init__(self):
        if self.scheduler not in (HEATS, K8S):
            raise ConfigError(f"unknown scheduler {self.scheduler!r}")
        if not 0.0 <= self.h_value <= 1.0:
            raise ConfigError("h_value must lie in [0, 1]")
        for name in ("reschedule_interval_s", "scheduling_interval_s", "monitor_interval_s"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.migration_overhead_s < 0:
            raise ConfigError("migration_overhead_s must be non-negative")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        return "k8s" if self.scheduler == K8S else f"H={self.h_value:g}"

    def to_dict(self) -> dict:
        return {
            "scheduler": self.scheduler, "h_value": self.h_value, "epsilon": self.epsilon,
            "reschedule_interval_s": self.reschedule_interval_s,
            "scheduling_interval_s": self.scheduling_interval_s,
            "monitor_interval_s": self.monitor_interval_s,
            "migration_overhead_s": self.migration_overhead_s,
            "forced_migrations": [[f.at_time_s, f.task_id, f.to_node]
                                  for f in self.forced_migrations],
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown policy keys: {sorted(unknown)}")
        d = dict(d)
        d["forced_migrations"] = tuple(ForcedMigration(float(t), str(tid), str(n))
                                       for t, tid, n in d.get("forced_migrations", ()))
        return cls(**d)


@dataclass(frozen=True)
class Segment:
    node_id: str
    start_s: float
    end_s: float
    stall_s: float
    work: float  # iterations completed in this segment
    power_w: float


@dataclass
class SimReport:
    policy: str
    makespan_s: float
    cluster_energy_j: float
    task_energy_j: float
    idle_energy_j: float
    migration_log: list
    rejected_migrations: int
    decisions: list
    utilization: list  # (time_s, node_id, cpu_frac, mem_frac)
    peak_running: int
    tasks: dict  # task_id -> finished Task
    segments: dict  # task_id -> [Segment]

    @property
    def cluster_energy_kj(self) -> float:
        return self.cluster_energy_j / 1000.0

    @property
    def task_energy_kj(self) -> float:
        return self.task_energy_j / 1000.0

    @property
    def migrations(self) -> int:
        return len(self.migration_log)

    def percentile_bands(self) -> list:
        """(time_s, metric, p0, p25, p50, p75, p100) per monitor tick and metric."""
        by_time = {}
        for t, _, c, m in self.utilization:
            by_time.setdefault(t, ([], []))
            by_time[t][0].append(c)
            by_time[t][1].append(m)
        rows = []
        for t, (cpu, mem) in by_time.items():
            for metric, vals in (("cpu", cpu), ("mem", mem)):
                ps = np.percentile(np.array(vals), PERCENTILES)
                rows.append((t, metric, *(float(p) for p in ps)))
        return rows

    def summary(self) -> dict:
        return {
            "policy": self.policy,
            "n_tasks": len(self.tasks),
            "makespan_s": self.makespan_s,
            "cluster_energy_j": self.cluster_energy_j,
            "task_energy_j": self.task_energy_j,
            "idle_energy_j": self.idle_energy_j,
            "migrations": self.migrations,
            "rejected_migrations": self.rejected_migrations,
            "peak_running": self.peak_running,
            "migration_log": self.migration_log,
        }

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "report.json", "w", newline="\n") as fh:
            json.dump(self.summary(), fh, indent=2)
            fh.write("\n")
        _write_csv(out / "utilization.csv", ("time_s", "node_id", "cpu_frac", "mem_frac"),
                   self.utilization)
        _write_csv(out / "percentiles.csv", ("time_s", "metric", "p0", "p25", "p50", "p75", "p100"),
                   self.percentile_bands())
        _write_csv(out / "decisions.csv",
                   ("time_s", "task_id", "action", "from_node", "to_node", "score"),
                   self.decisions)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def integrate_energy(timeline: Iterable) -> float:
    """Sum of power * duration over piecewise-constant (power_w, duration_s) segments."""
    total = 0.0
    for power, duration in timeline:
        if duration < 0:
            raise InvalidTimeline(f"negative segment duration {duration}")
        total += power * duration
    return total


def advance_task(task: Task, node: Node, dt_s: float) -> Task:
    """Run ``task`` on ``node`` for ``dt_s`` seconds, stopping at completion."""
    if dt_s < 0:
        raise ValueError("dt_s must be non-negative")
    if dt_s == 0 or task.state is TaskState.FINISHED:
        return task
    per_it = node.spec.per_iteration_s[node.governor]
    power = node.spec.active_power_w[node.governor]
    to_completion = task.remaining * per_it
    if dt_s >= to_completion:
        return replace(task, iterations_done=task.iterations_total,
                       energy_j=task.energy_j + power * to_completion, state=TaskState.FINISHED)
    return replace(task, iterations_done=task.iterations_done + dt_s / per_it,
                   energy_j=task.energy_j + power * dt_s)


def migrate_task(task: Task, from_node: Node, to_node: Node, overhead_s: float = 0.0) -> Task:
    """Move the reservation of a running task; its progress is kept as is.

    The stall of ``overhead_s`` is applied by the caller, which owns the clock.
    """
    if from_node.node_id == to_node.node_id:
        raise ValueError("source and destination are the same node")
    if overhead_s < 0:
        raise ValueError("overhead_s must be non-negative")
    if not fits(to_node, task):
        raise MigrationRejected(f"{to_node.node_id} has no room for task {task.task_id}")
    from_node.release(task)
    to_node.allocate(task)
    return replace(task, current_node=to_node.node_id)


@dataclass
class _Placement:
    node_id: str
    since_s: float  # last time progress was synced
    stall_until_s: float
    segment_start_s: float
    segment_work: float = 0.0
    segment_stall: float = 0.0
    version: int = 0


class Simulation:
    def __init__(self, cluster: ClusterConfig, trace: Sequence[Task], policy: PolicyConfig,
                 predictors: Optional[PredictorSet] = None, seed: int = 0):
        self.cluster = cluster
        self.policy = policy
        self.nodes = {n.node_id: n for n in cluster.build_nodes()}
        if policy.scheduler == HEATS:
            if predictors is None:
                predictors = probe_and_train(cluster, seed=seed)
            self.predictors = predictors
            self.placer = heats_placer(predictors)
            weights = TradeoffWeights.from_h(policy.h_value)
        else:
            self.predictors = None
            self.placer = k8s_placer
            weights = None
        self.tasks = {}
        for t in trace:
            if t.task_id in self.tasks:
                raise ConfigError(f"duplicate task id {t.task_id}")
            self.tasks[t.task_id] = replace(
                t, weights=weights or t.weights, iterations_done=0.0, energy_j=0.0,
                state=TaskState.PENDING, current_node=None)
        self.order = [t.task_id for t in trace]
        self._heap = []
        self._seq = 0
        self.pending = deque()
        self.placements = {}
        self.segments = {tid: [] for tid in self.tasks}
        self.finished = 0
        self.now = 0.0
        self.makespan = 0.0
        self._tick_at = None
        self.migration_log = []
        self.rejected = 0
        self.decisions = []
        self.utilization = []
        self.peak_running = 0

    # event plumbing
    def _push(self, time_s, kind, payload=None):
        heapq.heappush(self._heap, SimEvent(time_s, kind, self._seq, payload))
        self._seq += 1

    def _active(self) -> bool:
        return self.finished < len(self.tasks)

    def _ensure_scheduling_tick(self):
        if self._tick_at is not None or not self.pending:
            return
        step = self.policy.scheduling_interval_s
        k = math.ceil(self.now / step)
        self._tick_at = k
        self._push(k * step, EventKind.SCHEDULING_TICK, k)

    # task bookkeeping
    def _sync(self, tid: str) -> None:
        """Bring a running task's progress and energy up to ``self.now``."""
        pl = self.placements[tid]
        node = self.nodes[pl.node_id]
        task = self.tasks[tid]
        elapsed = self.now - pl.since_s
        stall = min(elapsed, max(0.0, pl.stall_until_s - pl.since_s))
        if stall > 0:
            task = replace(task, energy_j=task.energy_j + node.spec.active_power_w[node.governor] * stall)
            pl.segment_stall += stall
        before = task.iterations_done
        task = advance_task(task, node, elapsed - stall)
        pl.segment_work += task.iterations_done - before
        pl.since_s = self.now
        self.tasks[tid] = task

    def _close_segment(self, tid: str) -> None:
        pl = self.placements[tid]
        node = self.nodes[pl.node_id]
        self.segments[tid].append(Segment(pl.node_id, pl.segment_start_s, self.now, pl.segment_stall,
                                          pl.segment_work, node.spec.active_power_w[node.governor]))

    def _start(self, tid: str, node_id: str, stall_s: float = 0.0, version: int = 0) -> None:
        node = self.nodes[node_id]
        task = self.tasks[tid]
        self.placements[tid] = _Placement(node_id, self.now, self.now + stall_s, self.now,
                                          version=version)
        done_at = self.now + stall_s + task.remaining * node.spec.per_iteration_s[node.governor]
        self._push(done_at, EventKind.TASK_COMPLETION, (tid, version))

    def _migrate(self, tid: str, to_node: str, score=None) -> bool:
        task = self.tasks[tid]
        src = task.current_node
        try:
            if src == to_node:
                raise MigrationRejected(f"task {tid} already on {to_node}")
            if not fits(self.nodes[to_node], task):
                raise MigrationRejected(f"{to_node} has no room for task {tid}")
        except MigrationRejected:
            self.rejected += 1
            return False
        self._sync(tid)
        self._close_segment(tid)
        self.tasks[tid] = migrate_task(self.tasks[tid], self.nodes[src], self.nodes[to_node],
                                       self.policy.migration_overhead_s)
        version = self.placements[tid].version + 1
        self._start(tid, to_node, self.policy.migration_overhead_s, version)
        self.migration_log.append({"time_s": self.now, "task_id": tid,
                                   "from_node": src, "to_node": to_node})
        self.decisions.append((self.now, tid, Action.MIGRATE.value, src, to_node, score))
        return True

    # handlers
    def _on_arrival(self, tid: str) -> None:
        task = self.tasks[tid]
        if not any(n.spec.cores + 1e-9 >= task.cpu_req and n.spec.mem_mib >= task.mem_req_mib
                   for n in self.nodes.values()):
            raise UnsatisfiableTask(tid)
        self.pending.append(task)
        self._ensure_scheduling_tick()

    def _on_scheduling_tick(self, k: int) -> None:
        self._tick_at = None
        decisions = schedule(self.pending, list(self.nodes.values()), self.predictors,
                             self.now, placer=self.placer)
        deferred = deque()
        for task, d in zip(self.pending, decisions):
            if d.action is Action.DEFER:
                deferred.append(task)
                continue
            node = self.nodes[d.to_node]
            node.allocate(task)
            self.tasks[task.task_id] = replace(self.tasks[task.task_id], state=TaskState.RUNNING,
                                               current_node=node.node_id)
            self._start(task.task_id, node.node_id)
            self.decisions.append((self.now, task.task_id, Action.ASSIGN.value, None,
                                   node.node_id, d.score))
        self.pending = deferred
        if self.pending:
            self._tick_at = k + 1
            self._push((k + 1) * self.policy.scheduling_interval_s, EventKind.SCHEDULING_TICK, k + 1)
        running = sum(len(n.running_tasks) for n in self.nodes.values())
        self.peak_running = max(self.peak_running, running)

    def _running(self) -> list:
        return [self.tasks[tid] for tid in sorted(self.placements)]

    def _on_reschedule_tick(self, k: int) -> None:
        decisions = reschedule(self._running(), list(self.nodes.values()), self.predictors,
                               self.now, self.policy.epsilon)
        for d in decisions:
            self._migrate(d.task_id, d.to_node, d.score)
        self._push((k + 1) * self.policy.reschedule_interval_s, EventKind.RESCHEDULE_TICK, k + 1)

    def _on_forced(self, fm: ForcedMigration) -> None:
        task = self.tasks.get(fm.task_id)
        if task is None or task.state is not TaskState.RUNNING or fm.to_node not in self.nodes:
            self.rejected += 1
            return
        self._migrate(fm.task_id, fm.to_node)

    def _on_completion(self, payload) -> None:
        tid, version = payload
        pl = self.placements.get(tid)
        if pl is None or pl.version != version:
            return  # superseded by a migration
        node = self.nodes[pl.node_id]
        self._sync(tid)
        task = self.tasks[tid]
        if task.state is not TaskState.FINISHED:
            # float round-off left a sliver of work; finish it in closed form
            before = task.iterations_done
            task = advance_task(task, node, math.inf)
            pl.segment_work += task.iterations_done - before
        self.tasks[tid] = task
        self._close_segment(tid)
        node.release(task)
        self.tasks[tid] = replace(task, current_node=None)
        del self.placements[tid]
        self.finished += 1
        self.makespan = self.now
        self._ensure_scheduling_tick()

    def _on_monitor(self, k: int) -> None:
        for nid in sorted(self.nodes):
            n = self.nodes[nid]
            self.utilization.append((self.now, nid, n.allocated_cores / n.spec.cores,
                                     n.allocated_mem_mib / n.spec.mem_mib))
        self._push((k + 1) * self.policy.monitor_interval_s, EventKind.MONITOR_TICK, k + 1)

    def check_capacity(self) -> None:
        for n in self.nodes.values():
            if n.allocated_cores > n.spec.cores + 1e-9 or n.allocated_mem_mib > n.spec.mem_mib:
                raise AssertionError(f"capacity exceeded on {n.node_id} at t={self.now}")

    def run(self, check: bool = False) -> SimReport:
        for tid in self.order:
            self._push(self.tasks[tid].submit_time_s, EventKind.TASK_ARRIVAL, tid)
        if self.tasks:
            self._push(0.0, EventKind.MONITOR_TICK, 0)
            if self.policy.scheduler == HEATS:
                self._push(self.policy.reschedule_interval_s, EventKind.RESCHEDULE_TICK, 1)
            for fm in self.policy.forced_migrations:
                self._push(fm.at_time_s, EventKind.FORCED_MIGRATION, fm)
        handlers = {
            EventKind.TASK_COMPLETION: self._on_completion,
            EventKind.TASK_ARRIVAL: self._on_arrival,
            EventKind.SCHEDULING_TICK: self._on_scheduling_tick,
            EventKind.RESCHEDULE_TICK: self._on_reschedule_tick,
            EventKind.FORCED_MIGRATION: self._on_forced,
            EventKind.MONITOR_TICK: self._on_monitor,
        }
        while self._heap and self._active():
            ev = heapq.heappop(self._heap)
            self.now = ev.time_s
            handlers[ev.kind](ev.payload)
            if check:
                self.check_capacity()
        return self._report()

    def _report(self) -> SimReport:
        idle = integrate_energy((n.spec.idle_power_w, self.makespan) for n in self.nodes.values())
        task_energy = math.fsum(t.energy_j for t in self.tasks.values())
        return SimReport(
            policy=self.policy.name,
            makespan_s=self.makespan,
            cluster_energy_j=idle + task_energy,
            task_energy_j=task_energy,
            idle_energy_j=idle,
            migration_log=self.migration_log,
            rejected_migrations=self.rejected,
            decisions=self.decisions,
            utilization=self.utilization,
            peak_running=self.peak_running,
            tasks=self.tasks,
            segments=self.segments,
        )


def run(cluster: ClusterConfig, trace: Sequence[Task], policy: PolicyConfig, seed: int = 0,
        predictors: Optional[PredictorSet] = None, check: bool = False) -> SimReport:
    """Simulate ``trace`` until every task has finished.

    ``seed`` only matters when a HEATS policy is given no predictors: it
    seeds the probing run used to train them.
    """
    return Simulation(cluster, trace, policy, predictors, seed).run(check=check)
