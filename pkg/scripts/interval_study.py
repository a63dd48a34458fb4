"""Effect of the rescheduling interval on makespan and cluster energy."""

import argparse

from heats.experiment import ExperimentConfig, default_schedulers, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--intervals", type=float, nargs="+", default=[15.0, 30.0, 60.0, 120.0])
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    results = {}
    for x in args.intervals:
        # the baseline never reschedules, so it is left out
        cfg = ExperimentConfig(schedulers=default_schedulers(x)[:-1], seeds=(args.seed,),
                               reschedule_interval_s=x)
        results[x] = {r["scheduler"]: r for r in sweep(cfg)}
    names = list(results[args.intervals[0]])
    print("interval " + " ".join(f"{n:>16}" for n in names))
    for x, rows in results.items():
        cells = [f"{rows[n]['makespan_s']:6.1f}s/{rows[n]['cluster_energy_kj']:7.2f}kJ" for n in names]
        print(f"{x:7.0f}s " + " ".join(f"{c:>16}" for c in cells))
    for n in names:
        ms = [results[x][n]["makespan_s"] for x in results]
        es = [results[x][n]["cluster_energy_kj"] for x in results]
        print(f"{n}: makespan spread {max(ms) / min(ms) - 1:.2%}, energy spread {max(es) / min(es) - 1:.2%}")


if __name__ == "__main__":
    main()
