"""Runtime and energy of one k-means task per machine type and governor."""

from heats.calibration import default_cluster
from heats.cluster import ClusterConfig, GovernorMode, NodeConfig, Task
from heats.engine import K8S, PolicyConfig, run


def main(iterations=750):
    cluster = default_cluster()
    print(f"{'type':24} {'governor':12} {'runtime s':>10} {'task J':>9}")
    for type_id in cluster.type_ids():
        for gov in GovernorMode:
            single = ClusterConfig({type_id: cluster.specs[type_id]}, (NodeConfig("n", type_id, gov),))
            r = run(single, [Task("t", 0.0, 2.0, 512, iterations)], PolicyConfig(scheduler=K8S))
            print(f"{type_id:24} {gov.value:12} {r.makespan_s:10.2f} {r.task_energy_j:9.2f}")


if __name__ == "__main__":
    main()
