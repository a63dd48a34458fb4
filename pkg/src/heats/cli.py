"""Command-line front end.

Exit codes: 0 on success, 2 for usage or configuration errors, 1 for
failures while running.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from heats.cluster import GovernorMode, load_cluster
from heats.engine import HEATS, K8S, PolicyConfig, run
from heats.errors import ConfigError, HeatsError
from heats.experiment import (ExperimentConfig, load_experiment, relative_to_baseline, sweep,
                              write_summary)
from heats.predictor import (Target, read_models, run_probing, train,
                             write_models, write_samples)
from heats.sampler import TEN_DAYS_S, TWELVE_HOURS_S, sample_trace
from heats.trace import (SyntheticParams, generate_synthetic, read_events, read_tasks,
                         write_events, write_tasks)

log = logging.getLogger("heats")

# task shapes absent from the default probe grid, for held-out checks
HOLDOUT_GRID = ((1.5, 384, 300), (3.0, 640, 700), (2.0, 896, 900))


def _experiment(args) -> ExperimentConfig:
    cfg = load_experiment(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = ExperimentConfig(**{**cfg.__dict__, "seeds": (args.seed,)})
    return cfg


def _cluster(args, cfg: ExperimentConfig):
    if getattr(args, "cluster", None):
        return load_cluster(args.cluster)
    return cfg.cluster()


def _out(args, cfg: ExperimentConfig) -> Path:
    out = Path(args.out) if args.out else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(obj, path) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def cmd_gen_trace(args) -> int:
    cfg = _experiment(args)
    base = cfg.synthetic
    params = SyntheticParams(
        n_jobs=args.jobs if args.jobs is not None else base.n_jobs,
        bursts=args.bursts if args.bursts is not None else base.bursts,
        horizon_s=args.horizon_s if args.horizon_s is not None else base.horizon_s,
        burst_window_s=args.window_s if args.window_s is not None else base.burst_window_s,
        iter_min=args.iter_min if args.iter_min is not None else base.iter_min,
        iter_max=args.iter_max if args.iter_max is not None else base.iter_max,
        cpu_req=base.cpu_req, mem_req_mib=base.mem_req_mib)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    tasks = generate_synthetic(seed, params)
    path = _out(args, cfg) / "trace.csv"
    write_tasks(tasks, path)
    print(f"wrote {len(tasks)} tasks to {path}")
    return 0


def cmd_sample_trace(args) -> int:
    cfg = _experiment(args)
    cluster = _cluster(args, cfg)
    events = read_events(args.input)
    type_map = None
    if args.type_map:
        with open(args.type_map) as fh:
            type_map = json.load(fh)
    result = sample_trace(events, cluster, args.offset_s, args.duration_s, args.top_k,
                          type_map, args.skip_machine_steps)
    out = _out(args, cfg)
    write_events(result.events, out / "sampled_trace.csv")
    write_tasks(result.tasks, out / "tasks.csv")
    mapping_path = out / "machine_map.json"
    if result.mapping is not None:
        _write_json(dict(sorted(result.mapping.items())), mapping_path)
    elif mapping_path.exists():
        mapping_path.unlink()
    for stage, n in result.stage_counts.items():
        print(f"{stage:>8}: {n}")
    return 0


def heldout_error(cluster, predictors, grid=HOLDOUT_GRID) -> float:
    """Largest relative error of predictions against the ground-truth model."""
    worst = 0.0
    for type_id in cluster.type_ids():
        spec = cluster.specs[type_id]
        for gov in GovernorMode:
            for cpu, mem, iters in grid:
                truth = {Target.RUNTIME: spec.runtime_s(gov, iters),
                         Target.ENERGY: spec.energy_j(gov, iters)}
                for target, y in truth.items():
                    pred = predictors.model(type_id, gov, target)(cpu, mem, iters)
                    worst = max(worst, abs(pred - y) / y)
    return worst


def cmd_probe_fit(args) -> int:
    cfg = _experiment(args)
    cluster = _cluster(args, cfg)
    noise = args.noise if args.noise is not None else cfg.probe_noise
    seed = args.seed if args.seed is not None else cfg.probe_seed
    samples = run_probing(cluster, cfg.probe_grid, noise, seed)
    try:
        predictors = train(samples, cluster.type_ids())
    except HeatsError as exc:
        raise HeatsError(f"fit failed: {exc}") from exc
    out = _out(args, cfg)
    write_samples(samples, out / "probe_samples.csv")
    write_models(predictors, out / "models.json")
    err = heldout_error(cluster, predictors)
    _write_json({"noise_sd_rel": noise, "seed": seed, "n_samples": len(samples),
                 "heldout_max_rel_error": err}, out / "fit_report.json")
    print(f"{len(samples)} probe samples, {len(predictors.models)} models, "
          f"held-out max relative error {err:.3e}")
    return 0


def _policy(args, cfg: ExperimentConfig) -> PolicyConfig:
    if args.policy:
        path = Path(args.policy)
        if not path.is_file():
            raise ConfigError(f"policy file not found: {path}")
        with open(path) as fh:
            return PolicyConfig.from_dict(json.load(fh))
    return PolicyConfig(scheduler=args.scheduler, h_value=args.h, epsilon=args.epsilon,
                        reschedule_interval_s=(args.reschedule_interval_s
                                               or cfg.reschedule_interval_s))


def cmd_sim(args) -> int:
    cfg = _experiment(args)
    cluster = _cluster(args, cfg)
    policy = _policy(args, cfg)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    trace = read_tasks(args.trace) if args.trace else cfg.trace(seed)
    predictors = None
    if policy.scheduler == HEATS:
        predictors = read_models(args.models) if args.models else cfg.predictors(cluster)
    report = run(cluster, trace, policy, seed=seed, predictors=predictors)
    out = _out(args, cfg)
    report.write(out)
    print(f"{policy.name}: makespan {report.makespan_s:.1f} s, cluster energy "
          f"{report.cluster_energy_kj:.3f} kJ, task energy {report.task_energy_kj:.3f} kJ, "
          f"{report.migrations} migrations")
    return 0


def cmd_sweep(args) -> int:
    cfg = _experiment(args)
    rows = sweep(cfg, parallel=args.parallel)
    out = _out(args, cfg)
    write_summary(rows, out / "summary.csv")
    for r in rows:
        print(f"{r['scheduler']:>6} seed={r['seed']:<4} makespan={r['makespan_s']:8.1f} s "
              f"energy={r['cluster_energy_kj']:8.2f} kJ migrations={r['migrations']}")
    names = {r["scheduler"] for r in rows}
    if "k8s" in names and "H=1.0" in names:
        for seed, rel in relative_to_baseline(rows, "H=1.0").items():
            print(f"H=1.0 vs k8s (seed {seed}): energy savings {rel['energy_savings']:.1%}, "
                  f"runtime overhead {rel['runtime_overhead']:.1%}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config JSON")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--parallel", type=int, default=1, help="concurrent simulations")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="heats", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-trace", parents=[common], help="write a synthetic burst trace")
    p.add_argument("--jobs", type=int)
    p.add_argument("--bursts", type=int)
    p.add_argument("--horizon-s", type=float)
    p.add_argument("--window-s", type=float)
    p.add_argument("--iter-min", type=int)
    p.add_argument("--iter-max", type=int)
    p.set_defaults(func=cmd_gen_trace)

    p = sub.add_parser("sample-trace", parents=[common], help="extract and sample a cluster trace")
    p.add_argument("--input", required=True, help="normalised trace events CSV")
    p.add_argument("--cluster", help="testbed cluster JSON")
    p.add_argument("--offset-s", type=float, default=TEN_DAYS_S)
    p.add_argument("--duration-s", type=float, default=TWELVE_HOURS_S)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--type-map", help="JSON object mapping trace machine types to testbed types")
    p.add_argument("--skip-machine-steps", action="store_true",
                   help="for traces without machine information")
    p.set_defaults(func=cmd_sample_trace)

    p = sub.add_parser("probe-fit", parents=[common], help="probe the cluster and fit models")
    p.add_argument("--cluster")
    p.add_argument("--noise", type=float, help="relative noise of probe measurements")
    p.set_defaults(func=cmd_probe_fit)

    p = sub.add_parser("sim", parents=[common], help="simulate one scheduler on one trace")
    p.add_argument("--cluster")
    p.add_argument("--trace", help="task CSV; synthetic trace from --seed if omitted")
    p.add_argument("--policy", help="policy JSON")
    p.add_argument("--models", help="fitted models JSON")
    p.add_argument("--scheduler", choices=(HEATS, K8S), default=HEATS)
    p.add_argument("--h", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--reschedule-interval-s", type=float)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("sweep", parents=[common], help="compare the configured schedulers")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"heats {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except HeatsError as exc:
        print(f"heats {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
