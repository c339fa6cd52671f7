"""Exhaustive integer search used to check the planner on small instances."""

from itertools import combinations

import numpy as np

from .cost import total_costs
from .errors import InstanceTooLarge
from .partition import plan_from_rows, plan_violations

__all__ = ["MAX_DEVICES", "MAX_HEIGHT", "compositions", "ilp_oracle"]

MAX_DEVICES = 4
MAX_HEIGHT = 32


def compositions(total, parts):
    """Every ordered split of ``total`` into ``parts`` non-negative integers (stars and bars)."""
    for bars in combinations(range(total + parts - 1), parts - 1):
        prev, out = -1, []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 1 - prev - 1)
        yield out


def ilp_oracle(scenario):
    """Minimum-energy integer plan meeting every constraint and the deadline.

    Both the row split and the aggregating device are enumerated.  Returns
    ``(plan, costs, evaluated)`` where ``evaluated`` counts row splits;
    ``plan`` and ``costs`` are ``None`` when nothing is feasible.
    """
    n, h = scenario.n, scenario.height
    if n > MAX_DEVICES or h > MAX_HEIGHT:
        raise InstanceTooLarge(f"oracle limited to N <= {MAX_DEVICES}, H <= {MAX_HEIGHT}; got N={n}, H={h}")
    best = best_costs = None
    evaluated = 0
    for rows in compositions(h, n):
        evaluated += 1
        rows = np.array(rows)
        for agg in range(n):
            plan = plan_from_rows(scenario, rows, "oracle", aggregator=agg)
            if plan_violations(scenario, plan):
                continue
            costs = total_costs(scenario, plan.rows, plan.aggregator)
            if costs.t_total > scenario.deadline:
                continue
            if best is None or costs.energy < best_costs.energy:
                best, best_costs = plan, costs
    return best, best_costs, evaluated
