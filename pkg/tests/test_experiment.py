import json

import pytest

from heats.engine import K8S
from heats.errors import ConfigError
from heats.experiment import (RAND_H, ExperimentConfig, default_schedulers, load_experiment,
                              relative_to_baseline, sweep, write_summary)
from heats.trace import SyntheticParams


def test_default_scheduler_set():
    names = [p.name for p in default_schedulers()]
    assert names == ["H=0.0", "H=0.2", "H=0.4", "H=0.6", "H=0.8", "H=1.0", "rand", "k8s"]
    assert default_schedulers()[6].h_value == RAND_H
    assert default_schedulers()[-1].scheduler == K8S


def test_config_paths_resolve_against_file(tmp_path):
    (tmp_path / "trace.csv").write_text("task_id,submit_time_s,cpu_req,mem_req_mib,iterations\n")
    (tmp_path / "exp.json").write_text(json.dumps({
        "trace": {"path": "trace.csv"}, "seeds": [1, 2], "reschedule_interval_s": 30,
        "probe": {"noise_sd_rel": 0.0, "seed": 3}}))
    cfg = load_experiment(tmp_path / "exp.json")
    assert cfg.trace_path == tmp_path / "trace.csv"
    assert cfg.seeds == (1, 2) and cfg.probe_noise == 0.0
    assert {p.reschedule_interval_s for p in cfg.schedulers if p.scheduler != K8S} == {30.0}


@pytest.mark.parametrize("body", [
    {"colour": "red"},
    {"cluster": "missing.json"},
    {"seeds": []},
    {"schedulers": [{"scheduler": "fifo"}]},
])
def test_bad_configs(tmp_path, body):
    (tmp_path / "exp.json").write_text(json.dumps(body))
    with pytest.raises(ConfigError):
        load_experiment(tmp_path / "exp.json")


def test_small_sweep_and_summary(tmp_path):
    cfg = ExperimentConfig(synthetic=SyntheticParams(n_jobs=40), seeds=(1, 2))
    rows = sweep(cfg)
    assert [(r["seed"], r["scheduler"]) for r in rows[:2]] == [(1, "H=0.0"), (1, "H=0.2")]
    assert len(rows) == 16
    rel = relative_to_baseline(rows, "H=1.0")
    assert set(rel) == {1, 2}
    write_summary(rows, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0].startswith("scheduler,h_value,seed")
    assert len(lines) == 17
