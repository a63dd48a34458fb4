"""Trace formats and the synthetic burst workload.

Two CSV formats live here: the task list the simulator consumes
(``task_id,submit_time_s,cpu_req,mem_req_mib,iterations``) and the
normalised cluster-trace event format the sampler works on.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from heats.cluster import Task
from heats.errors import ConfigError, UnevenBursts
from heats.rng import Rng

TASK_COLUMNS = ("task_id", "submit_time_s", "cpu_req", "mem_req_mib", "iterations")
EVENT_COLUMNS = ("time_s", "kind", "user_id", "task_id", "machine_id", "machine_type",
                 "cpu_req", "mem_req")


@dataclass(frozen=True)
class SyntheticParams:
    n_jobs: int = 480
    bursts: int = 4
    horizon_s: float = 600.0
    burst_window_s: float = 150.0
    iter_min: int = 500
    iter_max: int = 1000
    cpu_req: float = 2.0  # two worker threads per k-means task
    mem_req_mib: int = 512


def generate_synthetic(seed: int, params: SyntheticParams = SyntheticParams()) -> list[Task]:
    """Tasks in equal bursts; burst b opens at b * horizon / bursts.

    Each task draws its offset inside the burst window, then its iteration
    count, from one shared generator. Ids follow submission order.
    """
    if params.bursts <= 0 or params.n_jobs < 0:
        raise ConfigError("bursts must be positive and n_jobs non-negative")
    if params.n_jobs % params.bursts:
        raise UnevenBursts(f"{params.n_jobs} jobs cannot be split into {params.bursts} equal bursts")
    if params.iter_min <= 0 or params.iter_max < params.iter_min:
        raise ConfigError("need 0 < iter_min <= iter_max")
    rng = Rng(seed)
    per_burst = params.n_jobs // params.bursts
    span = params.iter_max - params.iter_min + 1
    drawn = []
    for b in range(params.bursts):
        start = b * params.horizon_s / params.bursts
        for _ in range(per_burst):
            submit = start + rng.uniform() * params.burst_window_s
            iterations = params.iter_min + rng.next_u32() % span
            drawn.append((submit, len(drawn), iterations))
    drawn.sort()
    width = max(4, len(str(len(drawn))))
    return [Task(f"t{i:0{width}d}", submit, params.cpu_req, params.mem_req_mib, iterations,
                 user_id="synthetic")
            for i, (submit, _, iterations) in enumerate(drawn)]


def write_tasks(tasks: Sequence[Task], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TASK_COLUMNS)
        for t in tasks:
            w.writerow([t.task_id, repr(float(t.submit_time_s)), repr(float(t.cpu_req)),
                        t.mem_req_mib, t.iterations_total])


def read_tasks(path) -> list[Task]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"trace file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TASK_COLUMNS:
            raise ConfigError(f"{path}: expected header {','.join(TASK_COLUMNS)}")
        tasks = [Task(r["task_id"], float(r["submit_time_s"]), float(r["cpu_req"]),
                      int(r["mem_req_mib"]), int(r["iterations"])) for r in reader]
    return sorted(tasks, key=lambda t: t.submit_time_s)


class TraceKind(str, enum.Enum):
    SUBMIT = "submit"
    SCHEDULE = "schedule"
    FINISH = "finish"
    EVICT = "evict"
    MACHINE_ADD = "machine_add"
    MACHINE_REMOVE = "machine_remove"
    MACHINE_UPDATE = "machine_update"
    USAGE = "usage"


MACHINE_KINDS = frozenset({TraceKind.MACHINE_ADD, TraceKind.MACHINE_REMOVE,
                           TraceKind.MACHINE_UPDATE})


@dataclass(frozen=True)
class TraceEvent:
    time_s: float
    kind: TraceKind
    user_id: str = ""
    task_id: str = ""
    machine_id: str = ""
    machine_type: str = ""
    cpu_req: Optional[float] = None  # normalised to the largest machine, in [0, 1]
    mem_req: Optional[float] = None

    @property
    def is_machine_event(self) -> bool:
        return self.kind in MACHINE_KINDS

    def row(self) -> list:
        def opt(v):
            return "" if v is None else repr(float(v))
        return [repr(float(self.time_s)), self.kind.value, self.user_id, self.task_id,
                self.machine_id, self.machine_type, opt(self.cpu_req), opt(self.mem_req)]


def write_events(events: Sequence[TraceEvent], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_COLUMNS)
        for e in events:
            w.writerow(e.row())


def read_events(path) -> list[TraceEvent]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"trace file not found: {path}")

    def opt(v):
        return float(v) if v != "" else None

    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != EVENT_COLUMNS:
            raise ConfigError(f"{path}: expected header {','.join(EVENT_COLUMNS)}")
        try:
            return [TraceEvent(float(r["time_s"]), TraceKind(r["kind"]), r["user_id"],
                               r["task_id"], r["machine_id"], r["machine_type"],
                               opt(r["cpu_req"]), opt(r["mem_req"]))
                    for r in reader]
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
