"""Placement policies: the HEATS score/best-fit/schedule/reschedule loop and a
least-requested baseline that mimics the default Kubernetes spreading.

Every function here works on copies of the node list it is given; the
engine applies the returned decisions.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from heats.cluster import Node, Task, TradeoffWeights, fits
from heats.errors import NoCandidates
from heats.predictor import PredictorSet

TIE_TOL = 1e-12


@dataclass(frozen=True)
class NodeScore:
    node_id: str
    score: float
    predicted_energy_j: float = 0.0
    predicted_perf: float = 0.0  # 1 / predicted runtime


class Action(str, enum.Enum):
    ASSIGN = "assign"
    MIGRATE = "migrate"
    DEFER = "defer"


@dataclass(frozen=True)
class SchedulingDecision:
    task_id: str
    action: Action
    at_time_s: float = 0.0
    to_node: Optional[str] = None
    from_node: Optional[str] = None
    score: Optional[float] = None

    def __post_init__(self):
        if self.action is Action.MIGRATE and self.from_node == self.to_node:
            raise ValueError("migration source and destination must differ")


def scores(candidates: Sequence[Node], task: Task, weights: TradeoffWeights,
           predictors: PredictorSet) -> list[NodeScore]:
    """Weighted, max-normalised energy and performance score per candidate."""
    if not candidates:
        raise NoCandidates(f"no candidate nodes for task {task.task_id}")
    preds = []
    for node in candidates:
        energy, runtime = predictors.predict(node.spec.type_id, node.governor, task)
        preds.append((node.node_id, energy, 1.0 / runtime))
    max_e = max(e for _, e, _ in preds)
    max_p = max(p for _, _, p in preds)
    return [NodeScore(nid, weights.e_w * (1.0 - e / max_e) + weights.p_w * (p / max_p), e, p)
            for nid, e, p in preds]


def pick(ranked: Iterable[NodeScore], prefer: Optional[str] = None) -> Optional[NodeScore]:
    """Argmax with ties going to ``prefer`` and then to the smallest node id."""
    ranked = list(ranked)
    if not ranked:
        return None
    top = max(s.score for s in ranked)
    tied = [s for s in ranked if math.isclose(s.score, top, rel_tol=0.0, abs_tol=TIE_TOL)]
    for s in tied:
        if s.node_id == prefer:
            return s
    return min(tied, key=lambda s: s.node_id)


def _released(cluster: Sequence[Node], task: Task, host: Optional[str]) -> list[Node]:
    """Node copies with ``task``'s own reservation on ``host`` handed back."""
    out = []
    for node in cluster:
        if node.node_id == host and task.task_id in node.running_tasks:
            node = node.copy()
            node.release(task)
        out.append(node)
    return out


def rank_heats(task: Task, weights: TradeoffWeights, cluster: Sequence[Node],
               predictors: PredictorSet, current_host: Optional[str] = None) -> list[NodeScore]:
    view = _released(cluster, task, current_host) if current_host else cluster
    candidates = [n for n in view if fits(n, task)]
    if not candidates:
        return []
    return scores(candidates, task, weights, predictors)


def best_fit(task: Task, weights: TradeoffWeights, cluster: Sequence[Node],
             predictors: PredictorSet, current_host: Optional[str] = None) -> Optional[str]:
    """Highest-scoring node with room for ``task``, or None if nothing fits.

    With ``current_host`` set (rescheduling) the task's own resources on that
    host count as free, and the host wins exact ties.
    """
    best = pick(rank_heats(task, weights, cluster, predictors, current_host), current_host)
    return best.node_id if best else None


def baseline_k8s_score(candidates: Sequence[Node], task: Task) -> list[NodeScore]:
    """Least-requested score: mean free fraction of cores and memory after placement."""
    out = []
    for n in candidates:
        free_c = n.spec.cores - n.allocated_cores - task.cpu_req
        free_m = n.spec.mem_mib - n.allocated_mem_mib - task.mem_req_mib
        out.append(NodeScore(n.node_id, 0.5 * (free_c / n.spec.cores + free_m / n.spec.mem_mib)))
    return out


Placer = Callable[[Task, Sequence[Node]], Optional[NodeScore]]


def heats_placer(predictors: PredictorSet) -> Placer:
    def place(task, cluster):
        return pick(rank_heats(task, task.weights, cluster, predictors))
    return place


def k8s_placer(task: Task, cluster: Sequence[Node]) -> Optional[NodeScore]:
    return pick(baseline_k8s_score([n for n in cluster if fits(n, task)], task))


def schedule(pending: Iterable[Task], cluster: Sequence[Node],
             predictors: Optional[PredictorSet] = None, now_s: float = 0.0,
             placer: Optional[Placer] = None) -> list[SchedulingDecision]:
    """Poll pending tasks in FIFO order, assigning each to its best fit or deferring it."""
    if placer is None:
        placer = heats_placer(predictors)
    work = {n.node_id: n.copy() for n in cluster}
    nodes = list(work.values())
    failed = set()  # (cpu, mem) shapes that found no room this pass
    decisions = []
    for task in deque(pending):
        shape = (task.cpu_req, task.mem_req_mib)
        best = None if shape in failed else placer(task, nodes)
        if best is None:
            failed.add(shape)
            decisions.append(SchedulingDecision(task.task_id, Action.DEFER, now_s))
            continue
        work[best.node_id].allocate(task)
        decisions.append(SchedulingDecision(task.task_id, Action.ASSIGN, now_s,
                                            to_node=best.node_id, score=best.score))
    return decisions


def reschedule(running: Iterable[Task], cluster: Sequence[Node], predictors: PredictorSet,
               now_s: float = 0.0, epsilon: float = 0.0) -> list[SchedulingDecision]:
    """Migrate running tasks whose best fit beats their current host by more than epsilon."""
    work = {n.node_id: n.copy() for n in cluster}
    nodes = list(work.values())
    decisions = []
    for task in sorted(running, key=lambda t: t.task_id):
        host = task.current_node
        ranked = rank_heats(task, task.weights, nodes, predictors, current_host=host)
        best = pick(ranked, host)
        if best is None or best.node_id == host:
            continue
        current = next(s.score for s in ranked if s.node_id == host)
        if best.score - current <= epsilon:
            continue
        work[host].release(task)
        work[best.node_id].allocate(task)
        decisions.append(SchedulingDecision(task.task_id, Action.MIGRATE, now_s,
                                            to_node=best.node_id, from_node=host,
                                            score=best.score))
    return decisions
