import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heats.calibration import ARM
from heats.cluster import GovernorMode, Task
from heats.errors import EmptyProbeGrid, ModelMissing, SingularDesign, Underdetermined
from heats.predictor import (DEFAULT_GRID, PREDICTION_FLOOR, LinearModel, PredictorSet,
                             ProbeSample, Target, Workload, design_matrix, fit, maybe_refresh,
                             probe_and_train, read_models, read_samples, run_probing,
                             solve_normal_equations, train, write_models, write_samples)
from heats.rng import Rng

from oracles import exact_ols

PERF, PS = GovernorMode.PERFORMANCE, GovernorMode.POWERSAVE
HELDOUT = [(1.5, 384, 300), (3.0, 640, 700), (2.0, 896, 900), (0.5, 128, 1500)]


def random_design(rng, n):
    rows = [(0.5 + 7.5 * rng.uniform(), 128 + rng.next_u32() % 3968, 100 + rng.next_u32() % 1900)
            for _ in range(n)]
    beta = (rng.uniform() * 50, rng.uniform() * 10 - 5, rng.uniform() * 0.02, rng.uniform())
    y = [beta[0] + beta[1] * c + beta[2] * m + beta[3] * i + 5 * rng.gauss() for c, m, i in rows]
    return rows, y


def test_matches_exact_oracle_on_random_designs():
    rng = Rng(2024)
    for trial in range(100):
        n = 5 + rng.next_u32() % 196
        rows, y = random_design(rng, n)
        got = solve_normal_equations(design_matrix(rows), np.array(y))
        want = exact_ols(rows, y)
        for g, w in zip(got, want):
            assert math.isclose(g, float(w), rel_tol=1e-9), (trial, got, want)


def test_iteration_only_target():
    # y = 3 + 2 * iterations, the other features varied independently
    rows = [(1.0, 256, 10), (2.0, 512, 20), (4.0, 256, 30), (1.0, 1024, 40), (3.0, 768, 55)]
    beta = solve_normal_equations(design_matrix(rows), np.array([3.0 + 2.0 * r[2] for r in rows]))
    assert beta == pytest.approx([3.0, 0.0, 0.0, 2.0], abs=1e-9)


def test_noiseless_fit_is_identified(cluster, exact_predictors):
    for type_id in cluster.type_ids():
        spec = cluster.specs[type_id]
        for gov in GovernorMode:
            for cpu, mem, iters in HELDOUT:
                t = Task("h", 0.0, cpu, mem, iters)
                energy, runtime = exact_predictors.predict(type_id, gov, t)
                assert math.isclose(runtime, spec.runtime_s(gov, iters), rel_tol=1e-6)
                assert math.isclose(energy, spec.energy_j(gov, iters), rel_tol=1e-6)


def test_probe_governor_monotonicity(cluster):
    samples = run_probing(cluster, noise_sd_rel=0.0)
    by = {(s.type_id, s.workload, s.cpu_req, s.mem_req_mib, s.iterations, s.governor): s
          for s in samples}
    for (t, w, c, m, i, g), s in by.items():
        if g is PS:
            assert s.measured_runtime_s >= by[(t, w, c, m, i, PERF)].measured_runtime_s


def test_probing_count_and_order(cluster):
    samples = run_probing(cluster)
    assert len(samples) == len(cluster.type_ids()) * 2 * 2 * len(DEFAULT_GRID)
    assert samples[0].type_id == cluster.type_ids()[0]


def test_noisy_probing_is_seeded(cluster):
    a = run_probing(cluster, noise_sd_rel=0.05, seed=3)
    assert a == run_probing(cluster, noise_sd_rel=0.05, seed=3)
    assert a != run_probing(cluster, noise_sd_rel=0.05, seed=4)


def test_empty_grid(cluster):
    with pytest.raises(EmptyProbeGrid):
        run_probing(cluster, grid=())


def test_underdetermined(cluster):
    samples = run_probing(cluster, grid=DEFAULT_GRID[:3])
    with pytest.raises(Underdetermined):
        fit(samples, ARM, PERF, Target.RUNTIME)


def test_collinear_design_ridge_or_raise():
    # cpu and memory move together, so the Gram matrix is singular
    rows = [(1.0, 256, 100), (2.0, 512, 200), (3.0, 768, 150), (4.0, 1024, 400), (5.0, 1280, 90)]
    y = np.array([10.0 + 0.5 * r[2] for r in rows])
    with pytest.raises(SingularDesign):
        solve_normal_equations(design_matrix(rows), y, ridge=False)
    beta = solve_normal_equations(design_matrix(rows), y)
    assert design_matrix(rows) @ beta == pytest.approx(y, rel=1e-6)


def test_missing_model(exact_predictors):
    with pytest.raises(ModelMissing):
        exact_predictors.predict("no-such-type", PERF, Task("x", 0.0, 1.0, 1, 1))


def test_prediction_floor():
    neg = LinearModel((-5.0, 0.0, 0.0, 0.0), Target.ENERGY, 5, 0.0)
    models = {("m", PERF, Target.ENERGY): neg,
              ("m", PERF, Target.RUNTIME): LinearModel((-1.0, 0, 0, 0), Target.RUNTIME, 5, 0.0)}
    p = PredictorSet(models)
    assert p.predict("m", PERF, Task("x", 0.0, 1.0, 1, 1)) == (PREDICTION_FLOOR, PREDICTION_FLOOR)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(0, 3), st.sampled_from([-1e-3, 1e-3]))
def test_ols_local_optimality(seed, coef, delta):
    rows, y = random_design(Rng(seed), 20)
    samples = [ProbeSample("m", PERF, Workload.KMEANS, c, m, i, abs(v) + 1.0, 1.0)
               for (c, m, i), v in zip(rows, y)]
    model = fit(samples, "m", PERF, Target.RUNTIME)
    X = design_matrix(rows)
    target = np.array([s.measured_runtime_s for s in samples])
    b = np.array(model.coefficients)
    b[coef] += delta
    r = X @ b - target
    assert float(r @ r) >= model.residual_sse * (1 - 1e-12)


def test_refresh_respects_learning_period(cluster):
    p = probe_and_train(cluster)
    extra = run_probing(cluster, noise_sd_rel=0.1, seed=9)
    assert maybe_refresh(p, 100.0, extra, period_s=3600.0) is p
    q = maybe_refresh(p, 3600.0, extra, period_s=3600.0)
    assert q.trained_at_s == 3600.0
    assert len(q.samples) == len(p.samples) + len(extra)
    assert q.models != p.models


def test_model_and_sample_files_roundtrip(tmp_path, cluster):
    samples = run_probing(cluster, noise_sd_rel=0.02, seed=1)
    write_samples(samples, tmp_path / "s.csv")
    assert read_samples(tmp_path / "s.csv") == samples
    p = train(samples, cluster.type_ids())
    write_models(p, tmp_path / "m.json")
    q = read_models(tmp_path / "m.json")
    assert q.models == p.models
