"""Scheduler comparison over several trace seeds.

    python scripts/run_sweep.py --seeds 1 2 3 --out out/seeds
"""

import argparse
from pathlib import Path
from statistics import mean

from heats.experiment import ExperimentConfig, load_experiment, relative_to_baseline, sweep, write_summary


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(1, 11)))
    ap.add_argument("--parallel", type=int, default=1)
    ap.add_argument("--out", default="out/seeds")
    args = ap.parse_args()

    base = load_experiment(args.config) if args.config else ExperimentConfig()
    cfg = ExperimentConfig(**{**base.__dict__, "seeds": tuple(args.seeds)})
    rows = sweep(cfg, args.parallel)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_summary(rows, out / "summary.csv")

    names = list(dict.fromkeys(r["scheduler"] for r in rows))
    print(f"{'scheduler':>9} {'makespan s':>11} {'energy kJ':>10} {'migrations':>11}")
    for n in names:
        sel = [r for r in rows if r["scheduler"] == n]
        print(f"{n:>9} {mean(r['makespan_s'] for r in sel):11.1f} "
              f"{mean(r['cluster_energy_kj'] for r in sel):10.2f} "
              f"{mean(r['migrations'] for r in sel):11.1f}")
    rel = relative_to_baseline(rows, "H=1.0")
    if rel:
        print(f"H=1.0 vs k8s: mean energy savings {mean(v['energy_savings'] for v in rel.values()):.1%}, "
              f"mean runtime overhead {mean(v['runtime_overhead'] for v in rel.values()):.1%}")


if __name__ == "__main__":
    main()
