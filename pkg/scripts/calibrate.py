"""Show the calibrated machine constants and replay the single-task scenario."""

from heats.calibration import AMD, Calibration, default_specs, motivating_cluster
from heats.cluster import ClusterConfig, GovernorMode, NodeConfig, Task
from heats.engine import K8S, ForcedMigration, PolicyConfig, run


def main():
    cal = Calibration()
    print(f"AMD task power      {cal.amd_power_w:10.4f} W")
    print(f"ARM phase           {cal.arm_phase_s:10.4f} s, {cal.arm_phase_energy_j:.4f} J")
    print(f"ARM task power      {cal.arm_power_w:10.4f} W")
    print(f"ARM slowdown        {cal.arm_slowdown:10.4f} x per iteration")
    print()
    print(f"{'type':24} {'gov':12} {'s/iter':>10} {'W':>9} {'idle W':>8}")
    for spec in default_specs(cal).values():
        for gov in GovernorMode:
            print(f"{spec.type_id:24} {gov.value:12} {spec.per_iteration_s[gov]:10.5f} "
                  f"{spec.active_power_w[gov]:9.4f} {spec.idle_power_w:8.2f}")
    print()
    cluster = motivating_cluster(cal)
    amd = ClusterConfig({AMD: cluster.specs[AMD]}, (NodeConfig("amd-1", AMD),))
    t = Task("t0", 0.0, 2.0, 512, cal.reference_iterations)
    stay = run(amd, [t], PolicyConfig(scheduler=K8S))
    moved = run(cluster, [t], PolicyConfig(
        scheduler=K8S, forced_migrations=(ForcedMigration(cal.switch_s, "t0", "arm-1"),)))
    print(f"AMD only: {stay.makespan_s:.2f} s, {stay.task_energy_j:.2f} J")
    print(f"migrated: {moved.makespan_s:.2f} s ({moved.makespan_s / stay.makespan_s:.3f}x), "
          f"{moved.task_energy_j:.2f} J ({1 - moved.task_energy_j / stay.task_energy_j:.1%} saved)")


if __name__ == "__main__":
    main()
