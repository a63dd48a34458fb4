"""Trace-driven simulation of energy- and heterogeneity-aware task scheduling."""

from heats.cluster import GovernorMode, MachineSpec, Node, Task, TaskState, TradeoffWeights
from heats.engine import PolicyConfig, SimReport, run

__all__ = ["GovernorMode", "MachineSpec", "Node", "Task", "TaskState", "TradeoffWeights",
           "PolicyConfig", "SimReport", "run"]
__version__ = "0.1.0"
