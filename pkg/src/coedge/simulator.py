"""Logical-time replay of one cooperative inference, plus sweeps and epoch replay.

Time only advances per superstep: a layer starts when the slowest device has
finished the previous one.  Within a superstep a device first receives its
inputs (in the order the cost model lists them), then computes, then ships
the result if it is the aggregator of the last layer.
"""

import csv
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .cost import total_costs
from .errors import InvariantViolation, ParseError
from .partition import PLANNERS, plan_from_rows, run_planner

log = logging.getLogger(__name__)

__all__ = [
    "Event",
    "Trace",
    "simulate",
    "Epoch",
    "EpochSchedule",
    "EpochResult",
    "load_schedule",
    "run_epochs",
    "sweep_offloading_ratio",
    "sweep_deadline",
    "TRACE_COLUMNS",
    "write_trace_csv",
    "write_table_csv",
]

TRACE_COLUMNS = ("device", "layer", "kind", "start_s", "end_s", "bytes")


class Event(NamedTuple):
    device: int
    layer: int
    kind: str
    start: float
    end: float
    nbytes: float
    energy: float
    peer: int = -1


@dataclass(frozen=True)
class Trace:
    events: tuple
    finish_time: float
    busy: np.ndarray
    superstep_starts: np.ndarray

    @property
    def energy(self):
        return sum(e.energy for e in self.events)

    def by_kind(self, kind):
        return [e for e in self.events if e.kind == kind]


def simulate(scenario, plan):
    """Replay ``plan`` and return ``(trace, costs)``.

    The finish time is accumulated with exactly the arithmetic the cost model
    uses for the end-to-end latency, so the two agree bit for bit.
    """
    costs = total_costs(scenario, plan.rows, plan.aggregator)
    cluster = scenario.cluster
    p_x = cluster.vector("p_x")
    t_c, e_c = costs.t_c, costs.e_c
    rows = costs.assignment.rows
    n_layers, n = t_c.shape

    by_layer = [[] for _ in range(n_layers)]
    for tr in costs.transfers:
        by_layer[tr.layer].append(tr)

    events = []
    busy = np.zeros(n)
    starts = np.zeros(n_layers)
    clock = 0.0
    for l in range(n_layers):
        starts[l] = clock
        cursor = np.full(n, clock)
        tail = []
        for tr in by_layer[l]:
            if tr.kind == "result":
                tail.append(tr)
                continue
            i = tr.device
            ev = Event(i, l, tr.kind, cursor[i], cursor[i] + tr.seconds, tr.nbytes, p_x[i] * tr.seconds, tr.peer)
            events.append(ev)
            cursor[i] = ev.end
        for i in range(n):
            if rows[l, i] > 0:
                ev = Event(i, l, "compute", cursor[i], cursor[i] + t_c[l, i], 0.0, e_c[l, i])
                events.append(ev)
                cursor[i] = ev.end
        for tr in tail:
            i = tr.device
            events.append(Event(i, l, tr.kind, cursor[i], cursor[i] + tr.seconds, tr.nbytes,
                                p_x[i] * tr.seconds, tr.peer))
            cursor[i] += tr.seconds
        busy += t_c[l] + costs.t_x[l]
        clock += float(np.max(t_c[l] + costs.t_x[l]))
    return Trace(tuple(events), clock, busy, starts), costs


# -- epochs ------------------------------------------------------------------


@dataclass(frozen=True)
class Epoch:
    """Bandwidth for one period: a scalar for every link or a full matrix, bytes/s."""

    bandwidth: object
    repetitions: int = 1

    def __post_init__(self):
        b = np.asarray(self.bandwidth, dtype=float)
        off = b if b.ndim == 0 else b[~np.eye(b.shape[0], dtype=bool)]
        if np.any(~(off > 0)) or np.any(np.isinf(off)):
            raise InvariantViolation("bandwidth", "epoch bandwidths must be positive and finite")
        if not (isinstance(self.repetitions, int) and self.repetitions >= 1):
            raise InvariantViolation("repetitions", f"must be a positive integer, got {self.repetitions!r}")


@dataclass(frozen=True)
class EpochSchedule:
    epochs: tuple

    def __post_init__(self):
        object.__setattr__(self, "epochs", tuple(self.epochs))
        if not self.epochs:
            raise InvariantViolation("epochs", "schedule needs at least one epoch")

    @classmethod
    def from_rates(cls, rates, unit=1.0):
        return cls(tuple(Epoch(float(r) * unit) for r in rates))


def load_schedule(path):
    """Schedule document ``{"epochs": [{"bytes_per_s" | "kb_per_s": ..., "repetitions": n}]}``.

    ``bytes_per_s`` may be a scalar or an N x N matrix; ``kb_per_s`` counts
    1000 bytes.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    items = doc.get("epochs") if isinstance(doc, dict) else None
    if not isinstance(items, list):
        raise ParseError(f"{path}: schedule needs an 'epochs' list")
    epochs = []
    for k, e in enumerate(items):
        if not isinstance(e, dict):
            raise ParseError(f"epochs[{k}] must be an object")
        if "bytes_per_s" in e:
            bw = e["bytes_per_s"]
        elif "kb_per_s" in e:
            bw = float(e["kb_per_s"]) * 1000.0
        else:
            raise ParseError(f"epochs[{k}]: missing 'bytes_per_s' or 'kb_per_s'")
        try:
            epochs.append(Epoch(bw, int(e.get("repetitions", 1))))
        except InvariantViolation as exc:
            raise InvariantViolation(f"epochs[{k}].{exc.field}", str(exc)) from None
    return EpochSchedule(tuple(epochs))


@dataclass(frozen=True)
class EpochResult:
    index: int
    bandwidth: object
    repetitions: int
    plan: object
    latency: float
    energy: float
    deadline_met: bool
    planning_s: float


def run_epochs(scenario, schedule, planner="coedge"):
    """Re-plan and simulate once per epoch; planning wall-clock is measured, not simulated."""
    plan_fn = PLANNERS[planner] if isinstance(planner, str) else planner
    out = []
    for k, ep in enumerate(schedule.epochs):
        sc = scenario.with_bandwidth(ep.bandwidth)
        t0 = time.perf_counter()
        plan = plan_fn(sc)
        dt = time.perf_counter() - t0
        _, costs = simulate(sc, plan)
        log.info("epoch %d: planned in %.2f ms, latency %.4f s", k, dt * 1e3, costs.t_total)
        out.append(EpochResult(k, ep.bandwidth, ep.repetitions, plan, costs.t_total, costs.energy,
                               costs.t_total <= sc.deadline, dt))
    return out


# -- sweeps ------------------------------------------------------------------


def sweep_offloading_ratio(scenario, steps=11):
    """Latency and energy when a fixed share of rows moves from device 0 to device 1.

    ``steps`` is the number of sample points, evenly spaced over [0, 1].
    """
    if scenario.n != 2:
        raise InvariantViolation("devices", f"ratio sweep needs exactly 2 devices, got {scenario.n}")
    if steps < 2:
        raise InvariantViolation("steps", f"need at least 2 points, got {steps}")
    h = scenario.height
    table = []
    for k in range(steps):
        ratio = k / (steps - 1)
        off = int(round(ratio * h))
        plan = plan_from_rows(scenario, [h - off, off], "ratio")
        _, costs = simulate(scenario, plan)
        table.append({"ratio": ratio, "rows_local": h - off, "rows_offloaded": off,
                      "latency_s": costs.t_total, "energy_j": costs.energy})
    return table


def sweep_deadline(scenario, deadlines, planners=("coedge", "modnn", "musical_chair", "local")):
    """One row per (deadline, planner); energy is ``None`` when the deadline is missed."""
    table = []
    for d in deadlines:
        sc = scenario.with_deadline(d)
        for name in planners:
            plan = run_planner(name, sc)
            _, costs = simulate(sc, plan)
            met = costs.t_total <= sc.deadline
            table.append({"deadline_ms": d * 1e3, "planner": name, "executed": plan.planner,
                          "latency_s": costs.t_total, "energy_j": costs.energy if met else None,
                          "deadline_met": met})
    return table


# -- CSV ---------------------------------------------------------------------


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_table_csv(rows, columns, fp):
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])


def write_trace_csv(trace, fp):
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for e in trace.events:
        w.writerow([e.device, e.layer, e.kind, repr(float(e.start)), repr(float(e.end)), repr(float(e.nbytes))])
