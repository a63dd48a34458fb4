"""Exception hierarchy.

Errors that stem from bad user input (flags, config files, trace
parameters) derive from ``ConfigError`` so the CLI can map them to exit
code 2; everything else is a runtime failure.
"""


class HeatsError(Exception):
    pass


class ConfigError(HeatsError):
    pass


class UnevenBursts(ConfigError):
    pass


class EmptyProbeGrid(ConfigError):
    pass


class Underdetermined(HeatsError):
    pass


class SingularDesign(HeatsError):
    pass


class ModelMissing(HeatsError):
    def __init__(self, type_id, governor, target):
        super().__init__(f"no model for {type_id}:{governor}:{target}")
        self.key = (type_id, governor, target)


class NoCandidates(HeatsError):
    pass


class MigrationRejected(HeatsError):
    pass


class UnsatisfiableTask(HeatsError):
    def __init__(self, task_id):
        super().__init__(f"task {task_id} fits no node even on an empty cluster")
        self.task_id = task_id


class InvalidTimeline(HeatsError):
    pass


class NotBijective(ConfigError):
    pass


class UnmappedType(HeatsError):
    def __init__(self, machine_type):
        super().__init__(f"machine type {machine_type!r} has no mapping")
        self.machine_type = machine_type


class NoTargetNode(HeatsError):
    def __init__(self, machine_type):
        super().__init__(f"no testbed node of type {machine_type!r}")
        self.machine_type = machine_type


class IncompleteRecord(HeatsError):
    pass
