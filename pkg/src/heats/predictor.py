"""Probing and per-(machine type, governor) linear models of energy and runtime.

Probing replays the ground-truth machine model over a grid of task shapes,
with optional multiplicative Gaussian noise. Each model is an ordinary
least-squares fit of ``target ~ 1 + cpu_req + mem_req_mib + iterations``.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from heats.cluster import ClusterConfig, GovernorMode, Task
from heats.errors import ConfigError, EmptyProbeGrid, ModelMissing, SingularDesign, Underdetermined
from heats.rng import Rng

FEATURES = ("cpu_req", "mem_req_mib", "iterations")
PREDICTION_FLOOR = 1e-6
COND_LIMIT = 1e12
RIDGE_SCALE = 1e-8
MATMUL_FACTOR = 1.7

# (cpu_req, mem_req_mib, iterations); spread so the design has full rank
DEFAULT_GRID = (
    (1.0, 256, 200),
    (2.0, 512, 400),
    (2.0, 1024, 600),
    (4.0, 512, 800),
    (1.0, 768, 1000),
)


class Workload(str, enum.Enum):
    KMEANS = "kmeans"
    MATMUL = "matmul"


class Target(str, enum.Enum):
    ENERGY = "energy_j"
    RUNTIME = "runtime_s"


@dataclass(frozen=True)
class ProbeSample:
    type_id: str
    governor: GovernorMode
    workload: Workload
    cpu_req: float
    mem_req_mib: int
    iterations: int
    measured_runtime_s: float
    measured_energy_j: float

    def value(self, target: Target) -> float:
        return self.measured_energy_j if target is Target.ENERGY else self.measured_runtime_s


def run_probing(cluster: ClusterConfig, grid: Sequence = DEFAULT_GRID,
                noise_sd_rel: float = 0.0, seed: int = 0,
                matmul_factor: float = MATMUL_FACTOR) -> list[ProbeSample]:
    if not grid:
        raise EmptyProbeGrid("probe grid is empty")
    if noise_sd_rel < 0:
        raise ConfigError("noise_sd_rel must be non-negative")
    rng = Rng(seed)
    out = []
    for type_id in cluster.type_ids():
        spec = cluster.specs[type_id]
        for gov in GovernorMode:
            for workload in Workload:
                scale = matmul_factor if workload is Workload.MATMUL else 1.0
                for cpu, mem, iters in grid:
                    runtime = spec.runtime_s(gov, iters) * scale
                    energy = spec.active_power_w[gov] * runtime
                    if noise_sd_rel > 0:
                        runtime *= max(1.0 + noise_sd_rel * rng.gauss(), 1e-3)
                        energy *= max(1.0 + noise_sd_rel * rng.gauss(), 1e-3)
                    out.append(ProbeSample(type_id, gov, workload, float(cpu), int(mem),
                                           int(iters), runtime, energy))
    return out


@dataclass(frozen=True)
class LinearModel:
    coefficients: tuple  # intercept first
    target: Target
    n_samples: int
    residual_sse: float
    feature_names: tuple = FEATURES

    def __call__(self, cpu_req: float, mem_req_mib: float, iterations: float) -> float:
        b = self.coefficients
        return b[0] + b[1] * cpu_req + b[2] * mem_req_mib + b[3] * iterations


def design_matrix(rows: Iterable) -> np.ndarray:
    return np.array([[1.0, r[0], r[1], r[2]] for r in rows], dtype=float)


def solve_normal_equations(X: np.ndarray, y: np.ndarray, ridge: bool = True) -> np.ndarray:
    """Least squares via the normal equations on column-equilibrated X.

    Falls back to a tiny ridge term when the scaled Gram matrix is
    numerically singular; raises SingularDesign if that is disabled.
    """
    norms = np.linalg.norm(X, axis=0)
    norms[norms == 0] = 1.0
    Xs = X / norms
    gram = Xs.T @ Xs
    rhs = Xs.T @ y
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        if not ridge:
            raise SingularDesign(f"Gram matrix condition {cond:.3g} exceeds {COND_LIMIT:g}")
        lam = RIDGE_SCALE * np.trace(gram) / gram.shape[0]
        gram = gram + lam * np.eye(gram.shape[0])
    return np.linalg.solve(gram, rhs) / norms


def fit(samples: Sequence[ProbeSample], type_id: str, governor: GovernorMode,
        target: Target, workload: Workload = Workload.KMEANS,
        ridge: bool = True) -> LinearModel:
    rows = [s for s in samples
            if s.type_id == type_id and s.governor == governor and s.workload == workload]
    if len(rows) < len(FEATURES) + 1:
        raise Underdetermined(
            f"{type_id}:{governor.value}: {len(rows)} samples, need {len(FEATURES) + 1}")
    X = design_matrix((s.cpu_req, s.mem_req_mib, s.iterations) for s in rows)
    y = np.array([s.value(target) for s in rows])
    if np.any(y <= 0):
        raise ValueError("target values must be positive")
    beta = solve_normal_equations(X, y, ridge=ridge)
    resid = X @ beta - y
    return LinearModel(tuple(float(b) for b in beta), target, len(rows),
                       float(resid @ resid))


def _key_str(key) -> str:
    type_id, gov, target = key
    return f"{type_id}:{gov.value}:{target.value}"


@dataclass(frozen=True)
class PredictorSet:
    models: dict  # (type_id, GovernorMode, Target) -> LinearModel
    trained_at_s: float = 0.0
    samples: tuple = ()
    floor: float = PREDICTION_FLOOR
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def model(self, type_id: str, governor: GovernorMode, target: Target) -> LinearModel:
        try:
            return self.models[(type_id, governor, target)]
        except KeyError:
            raise ModelMissing(type_id, governor.value, target.value) from None

    def predict(self, type_id: str, governor: GovernorMode, task: Task) -> tuple[float, float]:
        key = (type_id, governor, task.cpu_req, task.mem_req_mib, task.iterations_total)
        hit = self._cache.get(key)
        if hit is None:
            x = (task.cpu_req, task.mem_req_mib, task.iterations_total)
            energy = self.model(type_id, governor, Target.ENERGY)(*x)
            runtime = self.model(type_id, governor, Target.RUNTIME)(*x)
            hit = (max(energy, self.floor), max(runtime, self.floor))
            self._cache[key] = hit
        return hit

    def to_dict(self) -> dict:
        return {
            "trained_at_s": self.trained_at_s,
            "models": {
                _key_str(k): {
                    "coefficients": list(m.coefficients),
                    "feature_names": list(m.feature_names),
                    "n_samples": m.n_samples,
                    "residual_sse": m.residual_sse,
                }
                for k, m in sorted(self.models.items(), key=lambda kv: _key_str(kv[0]))
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PredictorSet":
        models = {}
        for key, m in d["models"].items():
            type_id, gov, target = key.rsplit(":", 2)
            t = Target(target)
            models[(type_id, GovernorMode(gov), t)] = LinearModel(
                tuple(m["coefficients"]), t, int(m["n_samples"]), float(m["residual_sse"]),
                tuple(m.get("feature_names", FEATURES)))
        return cls(models, float(d.get("trained_at_s", 0.0)))


def predict(p: PredictorSet, type_id: str, governor: GovernorMode, task: Task) -> tuple[float, float]:
    """(energy_j, runtime_s) of ``task`` on the given machine type and governor."""
    return p.predict(type_id, governor, task)


def train(samples: Sequence[ProbeSample], type_ids: Iterable[str], now_s: float = 0.0,
          workload: Workload = Workload.KMEANS) -> PredictorSet:
    models = {}
    for type_id in type_ids:
        for gov in GovernorMode:
            for target in Target:
                models[(type_id, gov, target)] = fit(samples, type_id, gov, target, workload)
    return PredictorSet(models, now_s, tuple(samples))


def maybe_refresh(p: PredictorSet, now_s: float, new_samples: Sequence[ProbeSample],
                  period_s: float) -> PredictorSet:
    if period_s <= 0:
        raise ValueError("period_s must be positive")
    if now_s - p.trained_at_s < period_s:
        return p
    type_ids = sorted({k[0] for k in p.models})
    return train(tuple(p.samples) + tuple(new_samples), type_ids, now_s)


def probe_and_train(cluster: ClusterConfig, grid: Sequence = DEFAULT_GRID,
                    noise_sd_rel: float = 0.0, seed: int = 0) -> PredictorSet:
    samples = run_probing(cluster, grid, noise_sd_rel, seed)
    return train(samples, cluster.type_ids())


SAMPLE_COLUMNS = ("type_id", "governor", "workload", "cpu_req", "mem_req_mib", "iterations",
                  "measured_runtime_s", "measured_energy_j")


def write_samples(samples: Sequence[ProbeSample], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SAMPLE_COLUMNS)
        for s in samples:
            w.writerow([s.type_id, s.governor.value, s.workload.value, repr(s.cpu_req),
                        s.mem_req_mib, s.iterations, repr(s.measured_runtime_s),
                        repr(s.measured_energy_j)])


def read_samples(path) -> list[ProbeSample]:
    with open(path, newline="") as fh:
        return [ProbeSample(r["type_id"], GovernorMode(r["governor"]), Workload(r["workload"]),
                            float(r["cpu_req"]), int(r["mem_req_mib"]), int(r["iterations"]),
                            float(r["measured_runtime_s"]), float(r["measured_energy_j"]))
                for r in csv.DictReader(fh)]


def write_models(p: PredictorSet, path) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(p.to_dict(), fh, indent=2)
        fh.write("\n")


def read_models(path) -> PredictorSet:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"models file not found: {path}")
    with open(path) as fh:
        return PredictorSet.from_dict(json.load(fh))
