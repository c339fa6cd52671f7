"""Re-planning as the shared link speeds up and slows down.

Run with ``python demos/bandwidth_epochs.py``.
"""

from coedge import fixtures
from coedge.simulator import run_epochs


def main():
    sc = fixtures.scenario("alexnet")
    for r in run_epochs(sc, fixtures.schedule("bandwidth-trace")):
        print(f"epoch {r.index}: {float(r.bandwidth) / 1e3:6.0f} KB/s  rows {r.plan.rows}  "
              f"{r.latency * 1e3:6.1f} ms  {r.energy:.4f} J  planned in {r.planning_s * 1e3:.1f} ms"
              + ("" if r.deadline_met else "  MISSED"))


if __name__ == "__main__":
    main()
