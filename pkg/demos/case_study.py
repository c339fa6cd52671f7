"""Two-device case study: how latency and energy move as rows shift to the faster device.

Run with ``python demos/case_study.py``.  A Raspberry-Pi-class master
offloads a growing share of the AlexNet-like input to a Jetson-class
neighbour over a 1 MB/s link, then the planner picks its own split.
"""

from coedge import fixtures
from coedge.cost import total_costs
from coedge.partition import plan_coedge
from coedge.simulator import sweep_offloading_ratio


def main():
    sc = fixtures.scenario("pi-jetson-alexnet")
    print(f"{'ratio':>5}  {'rows':>9}  {'latency ms':>10}  {'energy J':>8}")
    for row in sweep_offloading_ratio(sc, 11):
        rows = f"{row['rows_local']}/{row['rows_offloaded']}"
        print(f"{row['ratio']:5.1f}  {rows:>9}  {row['latency_s'] * 1e3:10.1f}  {row['energy_j']:8.4f}")

    for deadline in (1.0, 0.2, 0.15):
        plan = plan_coedge(sc.with_deadline(deadline))
        c = total_costs(sc, plan.rows, plan.aggregator)
        print(f"deadline {deadline * 1e3:6.0f} ms -> rows {plan.rows}, "
              f"{c.t_total * 1e3:.1f} ms, {c.energy:.4f} J ({plan.planner})")


if __name__ == "__main__":
    main()
