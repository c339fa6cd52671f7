"""Six-device cluster: CoEdge against the baselines across models and deadlines.

Run with ``python demos/six_devices.py``.
"""

from coedge import fixtures
from coedge.cost import total_costs
from coedge.partition import PLANNERS, run_planner


def row(sc, name):
    plan = run_planner(name, sc)
    c = total_costs(sc, plan.rows, plan.aggregator)
    met = "yes" if c.t_total <= sc.deadline else "no"
    return f"  {name:14s} {c.t_total * 1e3:7.1f} ms {c.energy:7.4f} J  met {met:3s} rows {plan.rows}"


def main():
    for model in fixtures.MODELS:
        sc = fixtures.scenario(model)
        print(f"{model} (deadline {sc.deadline * 1e3:.0f} ms)")
        for name in PLANNERS:
            print(row(sc, name))

    print("\nalexnet, CoEdge under a sliding deadline")
    base = fixtures.scenario("alexnet")
    for d_ms in (75, 100, 150, 200, 300, 500):
        print(f"{d_ms:4d} ms" + row(base.with_deadline(d_ms / 1e3), "coedge"))


if __name__ == "__main__":
    main()
