"""Command-line front end.

Examples
--------
Plan the bundled AlexNet-like scenario and print the plan document::

    coedge plan --scenario alexnet --planner coedge

Energy of every planner under a range of deadlines, as CSV::

    coedge sweep-deadline --scenario alexnet --deadlines-ms 50,75,100,150,200,500

Exit status is 0 on success, 1 on invalid input and 2 when ``plan`` had to
fall back to offloading everything to one device.
"""

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import fixtures
from .errors import CoEdgeError
from .model import load_model
from .partition import PLANNERS, plan_document, run_planner
from .resources import load_cluster
from .scenario import Scenario, load_scenario
from .simulator import (
    EpochSchedule,
    load_schedule,
    run_epochs,
    simulate,
    sweep_deadline,
    sweep_offloading_ratio,
    write_table_csv,
    write_trace_csv,
)

log = logging.getLogger("coedge")

EXIT_OK, EXIT_ERROR, EXIT_FALLBACK = 0, 1, 2
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
PLANNER_CHOICES = tuple(PLANNERS) + ("all",)
DEFAULT_DEADLINES_MS = (50, 75, 100, 150, 200, 300, 500)


def _looks_like_path(ref):
    return os.sep in ref or "/" in ref or ref.endswith(".json")


def _resolve(ref, kind, loader, bundled):
    """Load ``ref`` from disk if it names a file, otherwise as a bundled fixture."""
    p = Path(ref)
    if p.is_file():
        return loader(p)
    if _looks_like_path(ref):
        raise FileNotFoundError(f"{kind} file not found: {ref}")
    return bundled(ref)


def _planners(name):
    return tuple(PLANNERS) if name == "all" else (name,)


def build_scenario(args, default="alexnet"):
    """Scenario from ``--scenario`` with ``--model``/``--cluster``/... overrides applied."""
    model = _resolve(args.model, "model", load_model, fixtures.model) if args.model else None
    cluster = _resolve(args.cluster, "cluster", load_cluster, fixtures.cluster) if args.cluster else None
    ref = args.scenario
    if ref is None and (model is None or cluster is None):
        ref = default
    if ref is not None:
        p = Path(ref)
        if not p.is_file():
            if _looks_like_path(ref):
                raise FileNotFoundError(f"scenario file not found: {ref}")
            p = fixtures.data_path("scenarios", ref)
        sc = load_scenario(p, model=model, cluster=cluster)
    else:
        sc = Scenario(model, cluster, 0.1, elem_bytes=1)
    if args.prefix is not None:
        sc = sc.with_cluster(sc.cluster.prefix(args.prefix))
    if args.deadline_ms is not None:
        sc = sc.with_deadline(args.deadline_ms / 1e3)
    if args.elem_bytes is not None:
        sc = Scenario(sc.model, sc.cluster, sc.deadline, elem_bytes=args.elem_bytes,
                      result_device=sc.result_device, result_bytes=sc.result_bytes)
    return sc


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fp:
            yield fp


def _summary(scenario, plan, stream):
    doc = plan_document(scenario, plan)
    print(f"planner: {doc['planner']}", file=stream)
    print(f"rows: {' '.join(str(r) for r in doc['rows'])} (aggregator {doc['aggregator']})", file=stream)
    print(f"latency: {doc['predicted_latency_s'] * 1e3:.3f} ms, energy: {doc['objective_energy_j']:.6f} J",
          file=stream)
    print(f"deadline met: {'yes' if doc['deadline_met'] else 'no'}", file=stream)
    if plan.note:
        print(f"note: {plan.note}", file=stream)


# -- subcommands -------------------------------------------------------------


def cmd_plan(args):
    sc = build_scenario(args)
    plans = [run_planner(name, sc) for name in _planners(args.planner)]
    docs = [plan_document(sc, p) for p in plans]
    to_file = args.out not in (None, "-")
    with _output(args.out) as fp:
        json.dump(docs[0] if len(docs) == 1 else docs, fp, indent=2)
        fp.write("\n")
    stream = sys.stdout if to_file else sys.stderr
    for p in plans:
        _summary(sc, p, stream)
    fell_back = [p for p in plans if p.is_fallback]
    for p in fell_back:
        print(f"fallback engaged: {p.note or 'no feasible cooperative plan'}", file=sys.stderr)
    return EXIT_FALLBACK if fell_back else EXIT_OK


def cmd_simulate(args):
    sc = build_scenario(args)
    if args.planner == "all":
        raise ValueError("simulate needs a single planner")
    plan = run_planner(args.planner, sc)
    trace, _ = simulate(sc, plan)
    with _output(args.out) as fp:
        write_trace_csv(trace, fp)
    stream = sys.stdout if args.out not in (None, "-") else sys.stderr
    _summary(sc, plan, stream)
    return EXIT_OK


def cmd_sweep_ratio(args):
    sc = build_scenario(args, default="pi-jetson-alexnet")
    table = sweep_offloading_ratio(sc, args.steps)
    with _output(args.out) as fp:
        write_table_csv(table, ("ratio", "rows_local", "rows_offloaded", "latency_s", "energy_j"), fp)
    return EXIT_OK


def cmd_sweep_deadline(args):
    sc = build_scenario(args)
    deadlines = [float(v) / 1e3 for v in args.deadlines_ms.split(",") if v.strip()]
    table = sweep_deadline(sc, deadlines, _planners(args.planner))
    with _output(args.out) as fp:
        write_table_csv(table, ("deadline_ms", "planner", "executed", "latency_s", "energy_j", "deadline_met"), fp)
    return EXIT_OK


def cmd_epochs(args):
    sc = build_scenario(args)
    ref = args.schedule
    if Path(ref).is_file():
        schedule = load_schedule(ref)
    elif _looks_like_path(ref):
        raise FileNotFoundError(f"schedule file not found: {ref}")
    else:
        schedule = fixtures.schedule(ref)
    if args.rates_kb_s:
        schedule = EpochSchedule.from_rates([float(v) for v in args.rates_kb_s.split(",")], 1000.0)
    rows = []
    for name in _planners(args.planner):
        for r in run_epochs(sc, schedule, name):
            bw = np.asarray(r.bandwidth, dtype=float)
            rows.append({
                "epoch": r.index,
                "bandwidth_kb_s": float(bw) / 1e3 if bw.ndim == 0 else "matrix",
                "planner": name,
                "executed": r.plan.planner,
                "rows": " ".join(str(v) for v in r.plan.rows),
                "latency_s": r.latency,
                "energy_j": r.energy,
                "deadline_met": r.deadline_met,
            })
    # planning wall-clock varies run to run, so it goes to the log, not the CSV
    with _output(args.out) as fp:
        write_table_csv(rows, ("epoch", "bandwidth_kb_s", "planner", "executed", "rows", "latency_s",
                               "energy_j", "deadline_met"), fp)
    return EXIT_OK


def cmd_fuzz(args):
    """Compare the replayed finish time and energy with the closed-form totals on random cases."""
    from .generate import random_rows, random_scenario
    from .partition import plan_from_rows

    rng = np.random.default_rng(args.seed)
    rows, failures = [], 0
    for case in range(args.count):
        sc = random_scenario(rng)
        a = random_rows(rng, sc)
        if a is None:
            continue
        trace, costs = simulate(sc, plan_from_rows(sc, a, "fuzz"))
        same_t = trace.finish_time == costs.t_total
        same_e = abs(trace.energy - costs.energy) <= 1e-9 * max(abs(costs.energy), 1e-300)
        failures += not (same_t and same_e)
        rows.append({"case": case, "devices": sc.n, "height": sc.height, "layers": sc.model.n_layers,
                     "latency_s": costs.t_total, "finish_s": trace.finish_time,
                     "energy_j": costs.energy, "match": same_t and same_e})
    with _output(args.out) as fp:
        write_table_csv(rows, ("case", "devices", "height", "layers", "latency_s", "finish_s", "energy_j", "match"),
                        fp)
    print(f"{len(rows)} cases, {failures} mismatches", file=sys.stderr)
    return EXIT_OK if failures == 0 else EXIT_ERROR


# -- parser ------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario file or bundled name (alexnet, vggf, googlenet, ...)")
    common.add_argument("--model", help="model file or bundled name, overriding the scenario's")
    common.add_argument("--cluster", help="cluster file or bundled name, overriding the scenario's")
    common.add_argument("--deadline-ms", type=float, help="override the scenario deadline")
    common.add_argument("--elem-bytes", type=int, help="bytes per feature-map element")
    common.add_argument("--prefix", type=int, help="keep only the first K devices of the cluster")
    common.add_argument("--out", help="output file ('-' or omitted for stdout)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised commands")

    parser = argparse.ArgumentParser(prog="coedge", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[common], help="partition one inference and write the plan")
    p.add_argument("--planner", choices=PLANNER_CHOICES, default="coedge")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", parents=[common], help="replay a plan and write its event trace")
    p.add_argument("--planner", choices=PLANNER_CHOICES, default="coedge")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep-ratio", parents=[common], help="two-device offloading-ratio sweep")
    p.add_argument("--steps", type=int, default=11, help="number of evenly spaced ratios in [0, 1]")
    p.set_defaults(func=cmd_sweep_ratio)

    p = sub.add_parser("sweep-deadline", parents=[common], help="energy of each planner under each deadline")
    p.add_argument("--planner", choices=PLANNER_CHOICES, default="all")
    p.add_argument("--deadlines-ms", default=",".join(str(d) for d in DEFAULT_DEADLINES_MS))
    p.set_defaults(func=cmd_sweep_deadline)

    p = sub.add_parser("epochs", parents=[common], help="re-plan under a changing bandwidth schedule")
    p.add_argument("--planner", choices=PLANNER_CHOICES, default="coedge")
    p.add_argument("--schedule", default="bandwidth-trace", help="schedule file or bundled name")
    p.add_argument("--rates-kb-s", help="comma-separated per-epoch link rates, replacing --schedule")
    p.set_defaults(func=cmd_epochs)

    p = sub.add_parser("fuzz", parents=[common], help="check replay against the closed-form totals")
    p.add_argument("--count", type=int, default=200)
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = LOG_LEVELS.get(os.environ.get("COEDGE_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        msg = str(exc) if exc.filename is None else f"file not found: {exc.filename}"
        print(f"error: {msg}", file=sys.stderr)
    except (CoEdgeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
