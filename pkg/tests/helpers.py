"""Small builders shared by several test modules."""

from heats.cluster import GovernorMode, MachineSpec, Node, Task
from heats.predictor import LinearModel, PredictorSet, Target

PERF, PS = GovernorMode.PERFORMANCE, GovernorMode.POWERSAVE


def machine(type_id, cores=8, mem=8192, per_it=0.1, power=10.0, idle=5.0):
    return MachineSpec(type_id, "x86", cores, 2.0, 200.0, mem, idle,
                       {PS: per_it * 2, PERF: per_it}, {PS: power / 2, PERF: power})


def node(node_id, cores=8, mem=8192, **kw):
    return Node(node_id, machine(node_id, cores, mem, **kw))


def constant_predictors(table):
    """``table`` maps type id to (energy_j, runtime_s), whatever the task."""
    models = {}
    for type_id, (energy, runtime) in table.items():
        for gov in GovernorMode:
            models[(type_id, gov, Target.ENERGY)] = LinearModel((energy, 0, 0, 0), Target.ENERGY, 5, 0.0)
            models[(type_id, gov, Target.RUNTIME)] = LinearModel((runtime, 0, 0, 0), Target.RUNTIME, 5, 0.0)
    return PredictorSet(models)


def task(tid="t", cpu=1.0, mem=256, iters=100, submit=0.0, **kw):
    return Task(tid, submit, cpu, mem, iters, **kw)
