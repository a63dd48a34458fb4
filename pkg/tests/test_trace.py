import hashlib

import pytest
from hypothesis import given, strategies as st

from heats.errors import ConfigError, UnevenBursts
from heats.trace import (SyntheticParams, TraceEvent, TraceKind, generate_synthetic, read_events,
                         read_tasks, write_events, write_tasks)


def test_default_burst_trace():
    tasks = generate_synthetic(42)
    assert len(tasks) == 480
    assert all(0.0 <= t.submit_time_s < 600.0 for t in tasks)
    assert all(500 <= t.iterations_total <= 1000 for t in tasks)
    assert all(t.cpu_req == 2.0 and t.mem_req_mib == 512 for t in tasks)
    for b in range(4):
        in_burst = [t for t in tasks if b * 150.0 <= t.submit_time_s < (b + 1) * 150.0]
        assert len(in_burst) == 120
    assert [t.submit_time_s for t in tasks] == sorted(t.submit_time_s for t in tasks)


def test_uneven_bursts():
    with pytest.raises(UnevenBursts):
        generate_synthetic(1, SyntheticParams(n_jobs=10, bursts=4))


def test_first_draws_follow_rng():
    from heats.rng import Rng
    rng = Rng(7)
    submit = rng.uniform() * 150.0
    iters = 500 + rng.next_u32() % 501
    one = generate_synthetic(7, SyntheticParams(n_jobs=1, bursts=1))
    assert (one[0].submit_time_s, one[0].iterations_total) == (submit, iters)


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_same_seed_same_bytes(tmp_path):
    write_tasks(generate_synthetic(42), tmp_path / "a.csv")
    write_tasks(generate_synthetic(42), tmp_path / "b.csv")
    assert digest(tmp_path / "a.csv") == digest(tmp_path / "b.csv")
    assert b"\r" not in (tmp_path / "a.csv").read_bytes()


@given(seed=st.integers(0, 2**32 - 1))
def test_task_csv_roundtrip(tmp_path_factory, seed):
    path = tmp_path_factory.mktemp("rt") / "t.csv"
    tasks = generate_synthetic(seed, SyntheticParams(n_jobs=8, bursts=2))
    write_tasks(tasks, path)
    back = read_tasks(path)
    assert [(t.task_id, t.submit_time_s, t.cpu_req, t.mem_req_mib, t.iterations_total) for t in back] == \
        [(t.task_id, t.submit_time_s, t.cpu_req, t.mem_req_mib, t.iterations_total) for t in tasks]


def test_event_csv_roundtrip(tmp_path):
    events = [TraceEvent(0.0, TraceKind.MACHINE_ADD, machine_id="m1", machine_type="A"),
              TraceEvent(1.5, TraceKind.SUBMIT, "u", "t", cpu_req=0.1, mem_req=0.2)]
    write_events(events, tmp_path / "e.csv")
    assert read_events(tmp_path / "e.csv") == events


def test_bad_files(tmp_path):
    with pytest.raises(ConfigError):
        read_tasks(tmp_path / "none.csv")
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        read_tasks(tmp_path / "bad.csv")
    with pytest.raises(ConfigError):
        read_events(tmp_path / "bad.csv")
