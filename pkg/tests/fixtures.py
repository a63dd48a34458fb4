"""A crafted miniature cluster trace: 12 users, 8 machines of 4 types."""

from heats.calibration import AMD, ARM, E3, E5
from heats.trace import TraceEvent, TraceKind as K

OFFSET = 1000.0
DURATION = 600.0
MACHINE_TYPES = {"m1": "A", "m2": "B", "m3": "C", "m4": "C", "m5": "C",
                 "m6": "D", "m7": "D", "m8": "D"}
TYPE_MAP = {"A": AMD, "B": E3, "C": E5, "D": ARM}
USERS = [f"u{i:02d}" for i in range(1, 13)]


def golden_events():
    ev = [TraceEvent(0.0, K.MACHINE_ADD, machine_id=m, machine_type=t)
          for m, t in MACHINE_TYPES.items()]
    ev.append(TraceEvent(500.0, K.MACHINE_UPDATE, machine_id="m3", machine_type="C"))
    # before the window: must not count towards users or machines
    ev.append(TraceEvent(900.0, K.SUBMIT, "u12", "early", cpu_req=0.1, mem_req=0.1))
    ev.append(TraceEvent(950.0, K.SCHEDULE, "u12", "early", machine_id="m8"))
    ev.append(TraceEvent(950.0, K.SCHEDULE, "u12", "early2", machine_id="m8"))
    k = 0
    for i, user in enumerate(USERS):
        for j in range(12 - i):
            machine = f"m{k % 8 + 1}"
            t = OFFSET + 3.0 * k
            tid = f"{user}-{j}"
            ev.append(TraceEvent(t, K.SUBMIT, user, tid, cpu_req=0.0625 * (1 + k % 3),
                                 mem_req=0.004 * (1 + k % 4)))
            ev.append(TraceEvent(t + 1.0, K.SCHEDULE, user, tid, machine_id=machine))
            if machine != "m7":
                ev.append(TraceEvent(t + 2.0, K.USAGE, user, tid, machine_id=machine))
            if k % 4:
                ev.append(TraceEvent(t + 2.0 + 10.0 * (k % 5 + 1), K.FINISH, user, tid,
                                     machine_id=machine))
            k += 1
    ev.append(TraceEvent(1200.0, K.MACHINE_UPDATE, machine_id="m8", machine_type="D"))
    ev.append(TraceEvent(OFFSET + DURATION, K.SUBMIT, "u01", "late", cpu_req=0.1, mem_req=0.1))
    ev.append(TraceEvent(1700.0, K.MACHINE_REMOVE, machine_id="m5"))
    # file order is deliberately not time order
    return ev[::-1]
