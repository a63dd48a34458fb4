"""Domain types shared by every other module: machines, nodes, tasks, weights.

Resources are accounted by *request*: a node's allocation is the sum of the
requests of the tasks placed on it, never a measured usage figure.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from heats.errors import ConfigError

# float sums of core requests; anything closer than this counts as equal
CAPACITY_TOL = 1e-9


class GovernorMode(str, enum.Enum):
    POWERSAVE = "powersave"
    PERFORMANCE = "performance"


class TaskState(str, enum.Enum):
    PENDING = "pending"
    RUNNING = "running"
    FINISHED = "finished"


@dataclass(frozen=True)
class MachineSpec:
    type_id: str
    arch: str
    cores: int
    frequency_ghz: float
    tdp_w: float
    mem_mib: int
    idle_power_w: float
    per_iteration_s: dict  # GovernorMode -> seconds per work unit
    active_power_w: dict  # GovernorMode -> watts drawn by one running task

    def __post_init__(self):
        if self.cores <= 0 or self.mem_mib <= 0:
            raise ConfigError(f"{self.type_id}: cores and mem_mib must be positive")
        if self.frequency_ghz <= 0 or self.tdp_w <= 0 or self.idle_power_w < 0:
            raise ConfigError(f"{self.type_id}: bad frequency/TDP/idle power")
        for table in (self.per_iteration_s, self.active_power_w):
            for g in GovernorMode:
                if table.get(g, 0) <= 0:
                    raise ConfigError(f"{self.type_id}: missing positive value for {g.value}")
        ps, perf = GovernorMode.POWERSAVE, GovernorMode.PERFORMANCE
        if self.per_iteration_s[ps] < self.per_iteration_s[perf]:
            raise ConfigError(f"{self.type_id}: powersave cannot be faster than performance")
        if self.active_power_w[ps] > self.active_power_w[perf]:
            raise ConfigError(f"{self.type_id}: powersave cannot draw more than performance")
        if max(self.active_power_w.values()) > self.tdp_w:
            raise ConfigError(f"{self.type_id}: active power exceeds TDP")

    # ground truth: runtime is affine in work with zero intercept, and energy
    # is the task's own active power over that runtime (idle excluded)
    def runtime_s(self, governor: GovernorMode, iterations: float) -> float:
        return iterations * self.per_iteration_s[governor]

    def energy_j(self, governor: GovernorMode, iterations: float) -> float:
        return self.active_power_w[governor] * self.runtime_s(governor, iterations)

    def to_dict(self) -> dict:
        return {
            "type_id": self.type_id,
            "arch": self.arch,
            "cores": self.cores,
            "frequency_ghz": self.frequency_ghz,
            "tdp_w": self.tdp_w,
            "mem_mib": self.mem_mib,
            "idle_power_w": self.idle_power_w,
            "per_iteration_s": {g.value: self.per_iteration_s[g] for g in GovernorMode},
            "active_power_w": {g.value: self.active_power_w[g] for g in GovernorMode},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MachineSpec":
        try:
            return cls(
                type_id=str(d["type_id"]),
                arch=str(d["arch"]),
                cores=int(d["cores"]),
                frequency_ghz=float(d["frequency_ghz"]),
                tdp_w=float(d["tdp_w"]),
                mem_mib=int(d["mem_mib"]),
                idle_power_w=float(d["idle_power_w"]),
                per_iteration_s={GovernorMode(k): float(v) for k, v in d["per_iteration_s"].items()},
                active_power_w={GovernorMode(k): float(v) for k, v in d["active_power_w"].items()},
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad machine spec {d.get('type_id', '?')}: {exc}") from exc


@dataclass
class Node:
    node_id: str
    spec: MachineSpec
    governor: GovernorMode = GovernorMode.PERFORMANCE
    allocated_cores: float = 0.0
    allocated_mem_mib: int = 0
    running_tasks: set = field(default_factory=set)

    def allocate(self, task: "Task") -> None:
        if not fits(self, task):
            raise ValueError(f"task {task.task_id} does not fit on {self.node_id}")
        self.allocated_cores += task.cpu_req
        self.allocated_mem_mib += task.mem_req_mib
        self.running_tasks.add(task.task_id)

    def release(self, task: "Task") -> None:
        self.running_tasks.discard(task.task_id)
        self.allocated_cores -= task.cpu_req
        self.allocated_mem_mib -= task.mem_req_mib
        if not self.running_tasks:
            # drop accumulated float error once the node drains
            self.allocated_cores = 0.0
            self.allocated_mem_mib = 0

    def copy(self) -> "Node":
        return Node(self.node_id, self.spec, self.governor, self.allocated_cores,
                    self.allocated_mem_mib, set(self.running_tasks))


@dataclass(frozen=True)
class TradeoffWeights:
    e_w: float
    p_w: float

    def __post_init__(self):
        if not (0.0 <= self.e_w <= 1.0 and 0.0 <= self.p_w <= 1.0):
            raise ValueError(f"weights must lie in [0, 1]: {self}")
        if abs(self.e_w + self.p_w - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1: {self}")

    @classmethod
    def from_h(cls, h: float) -> "TradeoffWeights":
        """H = 1 is the most energy-efficient setting, H = 0 the fastest."""
        return cls(e_w=h, p_w=1.0 - h)


@dataclass
class Task:
    task_id: str
    submit_time_s: float
    cpu_req: float
    mem_req_mib: int
    iterations_total: int
    user_id: str = ""
    weights: TradeoffWeights = TradeoffWeights(0.5, 0.5)
    # real-valued work units; exactly iterations_total once finished
    iterations_done: float = 0.0
    state: TaskState = TaskState.PENDING
    current_node: Optional[str] = None
    energy_j: float = 0.0

    def __post_init__(self):
        if self.cpu_req <= 0 or self.mem_req_mib <= 0 or self.iterations_total <= 0:
            raise ValueError(f"task {self.task_id}: requests and work must be positive")
        if self.submit_time_s < 0:
            raise ValueError(f"task {self.task_id}: negative submit time")

    @property
    def remaining(self) -> float:
        return self.iterations_total - self.iterations_done


def free_resources(node: Node) -> tuple[float, int]:
    return (node.spec.cores - node.allocated_cores,
            node.spec.mem_mib - node.allocated_mem_mib)


def fits(node: Node, task: Task) -> bool:
    cores, mem = free_resources(node)
    return cores + CAPACITY_TOL >= task.cpu_req and mem >= task.mem_req_mib


@dataclass(frozen=True)
class NodeConfig:
    node_id: str
    type_id: str
    governor: GovernorMode = GovernorMode.PERFORMANCE


@dataclass(frozen=True)
class ClusterConfig:
    specs: dict  # type_id -> MachineSpec, in file order
    nodes: tuple  # NodeConfig

    def __post_init__(self):
        if not self.nodes:
            raise ConfigError("cluster has no nodes")
        seen = set()
        for n in self.nodes:
            if n.type_id not in self.specs:
                raise ConfigError(f"node {n.node_id} references unknown type {n.type_id}")
            if n.node_id in seen:
                raise ConfigError(f"duplicate node id {n.node_id}")
            seen.add(n.node_id)

    def build_nodes(self) -> list[Node]:
        return [Node(n.node_id, self.specs[n.type_id], n.governor) for n in self.nodes]

    def type_ids(self) -> list[str]:
        """Types that actually have a node, in spec order."""
        used = {n.type_id for n in self.nodes}
        return [t for t in self.specs if t in used]

    def with_governor(self, governor: GovernorMode) -> "ClusterConfig":
        nodes = tuple(NodeConfig(n.node_id, n.type_id, governor) for n in self.nodes)
        return ClusterConfig(self.specs, nodes)

    def to_dict(self) -> dict:
        return {
            "machine_specs": [s.to_dict() for s in self.specs.values()],
            "nodes": [{"node_id": n.node_id, "type_id": n.type_id, "governor": n.governor.value}
                      for n in self.nodes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterConfig":
        try:
            specs = {}
            for raw in d["machine_specs"]:
                spec = MachineSpec.from_dict(raw)
                specs[spec.type_id] = spec
            nodes = tuple(
                NodeConfig(str(n["node_id"]), str(n["type_id"]),
                           GovernorMode(n.get("governor", "performance")))
                for n in d["nodes"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad cluster config: {exc}") from exc
        return cls(specs, nodes)


def load_cluster(path) -> ClusterConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"cluster file not found: {path}")
    with open(path) as fh:
        return ClusterConfig.from_dict(json.load(fh))


def save_cluster(cluster: ClusterConfig, path) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(cluster.to_dict(), fh, indent=2)
        fh.write("\n")
