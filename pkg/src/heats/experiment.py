"""Experiment configuration and the scheduler-comparison sweep."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from heats.calibration import default_cluster
from heats.cluster import ClusterConfig, load_cluster
from heats.engine import K8S, PolicyConfig, run
from heats.errors import ConfigError
from heats.predictor import DEFAULT_GRID, PredictorSet, probe_and_train
from heats.trace import SyntheticParams, generate_synthetic, read_tasks

RAND_H = 0.618
SUMMARY_COLUMNS = ("scheduler", "h_value", "seed", "makespan_s", "cluster_energy_kj",
                   "task_energy_kj", "migrations")


def default_schedulers(reschedule_interval_s: float = 60.0) -> tuple:
    """H from 0 to 1 in steps of 0.2, the fixed 'rand' setting, and the k8s baseline."""
    heats = [PolicyConfig(h_value=i / 5, reschedule_interval_s=reschedule_interval_s,
                          label=f"H={i / 5:.1f}") for i in range(6)]
    heats.append(PolicyConfig(h_value=RAND_H, reschedule_interval_s=reschedule_interval_s,
                              label="rand"))
    return tuple(heats) + (PolicyConfig(scheduler=K8S, label="k8s"),)


@dataclass(frozen=True)
class ExperimentConfig:
    cluster_path: Optional[Path] = None  # None selects the built-in cluster
    synthetic: SyntheticParams = SyntheticParams()
    trace_path: Optional[Path] = None  # overrides synthetic generation
    schedulers: tuple = field(default_factory=default_schedulers)
    seeds: tuple = (42,)
    reschedule_interval_s: float = 60.0
    probe_grid: tuple = DEFAULT_GRID
    probe_noise: float = 0.02
    probe_seed: int = 7
    learning_period_s: float = 86400.0
    out_dir: Path = Path("out")

    def __post_init__(self):
        if not self.schedulers:
            raise ConfigError("at least one scheduler config is required")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        for p in (self.cluster_path, self.trace_path):
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"file not found: {p}")

    def cluster(self) -> ClusterConfig:
        return load_cluster(self.cluster_path) if self.cluster_path else default_cluster()

    def trace(self, seed: int):
        if self.trace_path is not None:
            return read_tasks(self.trace_path)
        return generate_synthetic(seed, self.synthetic)

    def predictors(self, cluster: ClusterConfig) -> PredictorSet:
        return probe_and_train(cluster, self.probe_grid, self.probe_noise, self.probe_seed)

    @classmethod
    def from_dict(cls, d: dict, base: Path = Path(".")) -> "ExperimentConfig":
        def path(v):
            if v is None:
                return None
            p = Path(v)
            return p if p.is_absolute() else base / p

        d = dict(d)
        interval = float(d.pop("reschedule_interval_s", 60.0))
        kw = {"reschedule_interval_s": interval}
        if "cluster" in d:
            kw["cluster_path"] = path(d.pop("cluster"))
        trace = d.pop("trace", {}) or {}
        if "path" in trace:
            kw["trace_path"] = path(trace["path"])
        if "synthetic" in trace:
            kw["synthetic"] = SyntheticParams(**trace["synthetic"])
        if "schedulers" in d:
            pols = []
            for s in d.pop("schedulers"):
                s = dict(s)
                s.setdefault("reschedule_interval_s", interval)
                pols.append(PolicyConfig.from_dict(s))
            kw["schedulers"] = tuple(pols)
        else:
            kw["schedulers"] = default_schedulers(interval)
        if "seeds" in d:
            kw["seeds"] = tuple(int(s) for s in d.pop("seeds"))
        probe = d.pop("probe", {}) or {}
        if "grid" in probe:
            kw["probe_grid"] = tuple(tuple(p) for p in probe["grid"])
        if "noise_sd_rel" in probe:
            kw["probe_noise"] = float(probe["noise_sd_rel"])
        if "seed" in probe:
            kw["probe_seed"] = int(probe["seed"])
        if "learning_period_s" in d:
            kw["learning_period_s"] = float(d.pop("learning_period_s"))
        if "out" in d:
            kw["out_dir"] = path(d.pop("out"))
        if d:
            raise ConfigError(f"unknown experiment keys: {sorted(d)}")
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def load_experiment(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh), path.parent)


def _run_job(job):
    index, seed, cluster, trace, policy, predictors = job
    r = run(cluster, trace, policy, seed=seed, predictors=predictors)
    return index, seed, policy, r.makespan_s, r.cluster_energy_kj, r.task_energy_kj, r.migrations


def sweep(cfg: ExperimentConfig, parallel: int = 1) -> list[dict]:
    """One summary row per (scheduler, seed), ordered by seed then config order."""
    cluster = cfg.cluster()
    predictors = cfg.predictors(cluster)
    jobs = []
    for seed in cfg.seeds:
        trace = cfg.trace(seed)
        for i, pol in enumerate(cfg.schedulers):
            jobs.append((i, seed, cluster, trace, pol, predictors))
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    results.sort(key=lambda r: (cfg.seeds.index(r[1]), r[0]))
    return [{
        "scheduler": pol.name,
        "h_value": None if pol.scheduler == K8S else pol.h_value,
        "seed": seed,
        "makespan_s": makespan,
        "cluster_energy_kj": energy,
        "task_energy_kj": task_energy,
        "migrations": migrations,
    } for _, seed, pol, makespan, energy, task_energy, migrations in results]


def write_summary(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in rows:
            w.writerow(["" if row[c] is None else repr(row[c]) if isinstance(row[c], float)
                        else row[c] for c in SUMMARY_COLUMNS])


def relative_to_baseline(rows: Sequence[dict], label: str, baseline: str = "k8s") -> dict:
    """Energy savings and runtime overhead of ``label`` against ``baseline``, per seed."""
    by = {(r["scheduler"], r["seed"]): r for r in rows}
    out = {}
    for (name, seed), r in by.items():
        if name != label or (baseline, seed) not in by:
            continue
        b = by[(baseline, seed)]
        out[seed] = {
            "energy_savings": 1.0 - r["cluster_energy_kj"] / b["cluster_energy_kj"],
            "runtime_overhead": r["makespan_s"] / b["makespan_s"] - 1.0,
        }
    return out
