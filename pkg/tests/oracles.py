"""Independent reference implementations used by the tests."""

from fractions import Fraction


def exact_ols(rows, y):
    """Normal-equation solution in exact rational arithmetic.

    ``rows`` are feature tuples without the intercept column.
    """
    X = [[Fraction(1)] + [Fraction(v) for v in r] for r in rows]
    Y = [Fraction(v) for v in y]
    d = len(X[0])
    A = [[sum(x[i] * x[j] for x in X) for j in range(d)] for i in range(d)]
    b = [sum(x[i] * yy for x, yy in zip(X, Y)) for i in range(d)]
    for c in range(d):
        p = next(r for r in range(c, d) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        b[c], b[p] = b[p], b[c]
        for r in range(d):
            if r != c and A[r][c] != 0:
                f = A[r][c] / A[c][c]
                A[r] = [a - f * ac for a, ac in zip(A[r], A[c])]
                b[r] -= f * b[c]
    return [b[i] / A[i][i] for i in range(d)]


def score_vector(preds, e_w, p_w):
    """Scores from (node_id, energy, runtime) triples, written out longhand."""
    max_e = max(e for _, e, _ in preds)
    max_p = max(1.0 / r for _, _, r in preds)
    return {nid: e_w * (1.0 - e / max_e) + p_w * ((1.0 / r) / max_p) for nid, e, r in preds}


# Brute-force trace sampling stages. Each one is written from its predicate
# alone, without reusing anything from the package.

MACHINE_EVENT_KINDS = ("machine_add", "machine_remove", "machine_update")


def window(events, offset, duration):
    idx = sorted(range(len(events)), key=lambda i: (events[i].time_s, i))
    out = []
    for i in idx:
        e = events[i]
        if offset <= e.time_s and e.time_s < offset + duration:
            out.append(e.__class__(**{**e.__dict__, "time_s": e.time_s - offset}))
    return out


def top_k_users(events, k):
    users = sorted({e.user_id for e in events if e.user_id})
    count = {u: len([e for e in events if e.kind.value == "schedule" and e.user_id == u])
             for u in users}
    ranked = sorted((u for u in users if count[u] > 0), key=lambda u: (-count[u], u))
    return ranked[:k]


def keep_users(events, users):
    return [e for e in events if e.kind.value in MACHINE_EVENT_KINDS or e.user_id in users]


def stable_machines(events):
    ids = sorted({e.machine_id for e in events if e.machine_id})
    out = set()
    for m in ids:
        touched = any(e.machine_id == m and e.kind.value in MACHINE_EVENT_KINDS for e in events)
        ran = any(e.machine_id == m and e.kind.value == "schedule" for e in events)
        used = any(e.machine_id == m and e.kind.value == "usage" for e in events)
        if ran and used and not touched:
            out.add(m)
    return out


def known_types(events, before):
    types = {}
    for e in sorted(events, key=lambda e: e.time_s):
        if e.time_s >= before:
            break
        if e.kind.value in ("machine_add", "machine_update") and e.machine_type:
            types[e.machine_id] = e.machine_type
        if e.kind.value == "machine_remove":
            types.pop(e.machine_id, None)
    return types


def greedy_fold(counts, machine_type, nodes):
    """counts: machine -> schedules; nodes: [(node_id, type)]."""
    left = dict(counts)
    load = {n: 0 for n, _ in nodes}
    mapping = {}
    while left:
        top = max(left.values())
        m = min(x for x in left if left[x] == top)
        options = [n for n, t in nodes if t == machine_type[m]]
        best = min(load[n] for n in options)
        target = min(n for n in options if load[n] == best)
        mapping[m] = target
        load[target] += left.pop(m)
    return mapping
