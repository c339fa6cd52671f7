"""Workload partitioning: the relaxed LP, the threshold recursion and baselines.

A plan splits the input height into contiguous row ranges, one per device in
cluster order.  :func:`plan_coedge` solves the continuous relaxation over a
shrinking candidate set until the fractions respect the neighbour threshold,
then rounds them to whole rows.  When no candidate set works the whole input
goes to the single device with the lowest end-to-end latency.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .cost import _check_span, geometry, next_active, propagate_rows, total_costs
from .errors import HaloSpanViolation, MissingBandwidth, PlanInvalid, RepairFailed

log = logging.getLogger(__name__)

__all__ = [
    "PLANNERS",
    "PartitionPlan",
    "P2Solution",
    "layer1_threshold",
    "build_p2",
    "solve_p2",
    "relaxed_optimum",
    "satisfies_threshold",
    "round_plan",
    "select_aggregator",
    "plan_coedge",
    "plan_modnn",
    "plan_musical_chair",
    "plan_local",
    "fallback_full_offload",
    "plan_from_rows",
    "plan_violations",
    "validate_plan",
    "meets_deadline",
    "plan_document",
    "run_planner",
]

ZERO = 1e-9
TIGHTEN_TRIES = 3


@dataclass(frozen=True)
class PartitionPlan:
    planner: str
    lam: tuple
    rows: tuple
    aggregator: int
    lp_objective: float = None
    recursions: int = 0
    note: str = ""

    @property
    def active(self):
        return tuple(i for i, a in enumerate(self.rows) if a > 0)

    @property
    def is_fallback(self):
        return self.planner == "fallback_full_offload"


def layer1_threshold(model):
    """Minimum layer-1 rows an active device with an active successor must hold.

    The largest halo over all convolutions, scaled back to input rows through
    the strides of the layers in front of it.
    """
    best, stride = 0, 1
    for layer in model.layers:
        if not layer.is_conv:
            break
        best = max(best, (layer.k // 2) * stride)
        stride *= layer.s
    return best


# -- relaxed problem ---------------------------------------------------------


def _links(cluster, src, dst):
    b = cluster.bandwidth.array[np.asarray(src), np.asarray(dst)]
    bad = np.flatnonzero(np.isnan(b))
    if bad.size:
        raise MissingBandwidth(int(np.asarray(src)[bad[0]]), int(np.asarray(dst)[bad[0]]))
    return b


def _linear_costs(scenario, subset, agg):
    """Per (layer, device) latency terms as ``coef . lam + const``.

    Returns coefficient arrays of shape ``(L, n, n)`` and constants ``(L, n)``
    split into computation and transmission parts.
    """
    cluster = scenario.cluster
    geo = geometry(scenario.model, scenario.elem_bytes)
    n, L = len(subset), geo.n_layers
    idx = np.asarray(subset)
    ar = np.arange(n)
    rho, f = cluster.vector("rho")[idx], cluster.vector("f")[idx]
    kb, rb, halo = geo.layer_kb, geo.row_bytes, geo.halo
    q_agg = subset.index(agg)

    cc = np.zeros((L, n, n))
    cx = np.zeros((L, n, n))
    kc = np.zeros((L, n))
    kx = np.zeros((L, n))
    conv = np.flatnonzero(geo.conv)
    cc[conv[:, None], ar, ar] = rho[None, :] * kb[conv, None] / f[None, :]
    b0 = _links(cluster, [cluster.master] * n, idx)
    cx[0, ar, ar] = geo.heights[0] * rb[0] / b0
    kx[0, :-1] = halo[0] * rb[0] / b0[:-1]
    if n > 1:
        deep = conv[(conv > 0) & (halo[conv] > 0)]
        if deep.size:
            b_next = _links(cluster, idx[:-1], idx[1:])
            kx[deep[:, None], ar[:-1]] = (halo[deep] * rb[deep])[:, None] / b_next[None, :]
    fcs = np.flatnonzero(~geo.conv)
    kc[fcs, q_agg] = rho[q_agg] * kb[fcs] / f[q_agg]
    others = ar[idx != agg]
    if others.size:
        b_agg = _links(cluster, idx[others], [agg] * others.size)
        if geo.first_fc is None:
            cx[L - 1, q_agg, others] = geo.out_shape[0] * geo.out_row_bytes / b_agg
        else:
            lf = geo.first_fc
            cx[lf, q_agg, others] = geo.heights[lf] * rb[lf] / b_agg
    kx[L - 1, q_agg] += scenario.result_bytes / cluster.bandwidth(agg, scenario.result_device)
    return cc, cx, kc, kx


def build_p2(scenario, subset=None, aggregator=None, prune=False):
    """Linear relaxation over the fractions of ``subset`` plus per-layer epigraph times.

    Variables are ``(lam_1..lam_n, t_1..t_L)``.  Inequality rows, in order:
    ``n*L`` epigraph rows, ``n*L`` memory rows, one deadline row and ``n``
    sign rows.  Terms independent of the fractions (halo pulls, the FC
    stage, the result transfer) enter as constants.  ``prune`` drops rows
    that cannot bind, which the planner uses to keep solves fast.
    """
    cluster = scenario.cluster
    subset = list(range(cluster.n)) if subset is None else sorted(subset)
    if aggregator is None:
        aggregator = subset[0]
    if aggregator not in subset:
        raise ValueError(f"aggregator {aggregator} not in candidate set {subset}")
    geo = geometry(scenario.model, scenario.elem_bytes)
    n, L = len(subset), geo.n_layers
    cc, cx, kc, kx = _linear_costs(scenario, subset, aggregator)
    p_c = np.array([cluster.devices[d].p_c for d in subset])
    p_x = np.array([cluster.devices[d].p_x for d in subset])
    mem = np.array([cluster.devices[d].m for d in subset])

    c = np.zeros(n + L)
    c[:n] = np.einsum("j,ljk->k", p_c, cc) + np.einsum("j,ljk->k", p_x, cx)
    constant = float(np.sum(p_c[None, :] * kc) + np.sum(p_x[None, :] * kx))

    epi = np.zeros((L * n, n + L))
    epi[:, :n] = (cc + cx).reshape(L * n, n)
    epi[np.arange(L * n), n + np.repeat(np.arange(L), n)] = -1.0
    epi_b = -(kc + kx).reshape(L * n)

    memr = np.zeros((L * n, n + L))
    mem_b = np.tile(mem, L).astype(float)
    kb = geo.layer_kb
    q_agg = subset.index(aggregator)
    for l in range(L):
        rows = slice(l * n, (l + 1) * n)
        if geo.conv[l]:
            memr[rows, :n] = np.eye(n) * kb[l]
        else:
            mem_b[l * n + q_agg] -= kb[l]

    dl = np.zeros((1, n + L))
    dl[0, n:] = 1.0
    sign = np.zeros((n, n + L))
    sign[:, :n] = -np.eye(n)

    A = np.vstack([epi, memr, dl, sign])
    b = np.concatenate([epi_b, mem_b, [scenario.deadline], np.zeros(n)])
    kinds = ["epigraph"] * (L * n) + ["memory"] * (L * n) + ["deadline"] + ["sign"] * n
    if prune:
        kinds = np.array(kinds)
        lam_part = A[:, :n]
        keep = np.ones(len(b), dtype=bool)
        keep[kinds == "sign"] = False
        mem_rows = kinds == "memory"
        keep[mem_rows] = np.maximum(lam_part[mem_rows], 0).sum(axis=1) > b[mem_rows]
        epi_rows = kinds == "epigraph"
        keep[epi_rows] = np.any(lam_part[epi_rows] != 0, axis=1) | (b[epi_rows] != 0)
        A, b = A[keep], b[keep]
        kinds = kinds[keep].tolist()
    A_eq = np.zeros((1, n + L))
    A_eq[0, :n] = 1.0
    return lp.LPProblem(
        c, A, b, A_eq, [1.0], constant=constant,
        labels={"subset": subset, "aggregator": aggregator, "kinds": kinds, "n": n, "L": L,
                "terms": (cc, cx, kc, kx)},
    )


@dataclass
class P2Solution:
    status: lp.Status
    subset: list
    aggregator: int
    lam: np.ndarray = None
    objective: float = None
    relaxed_latency: float = None
    deadline: float = None
    problem: object = field(default=None, repr=False)

    @property
    def ok(self):
        return self.status is lp.Status.OPTIMAL

    @property
    def deadline_slack(self):
        """Deadline minus the smallest per-layer times the fractions allow."""
        return self.deadline - self.relaxed_latency


def _shifted_solve(prob):
    # t_l >= k_lj for every j, so substituting t_l = u_l + max_j k_lj keeps
    # u >= 0 and turns the epigraph right-hand sides non-negative; phase 1
    # then only needs artificials for the equality and the deadline row.
    n, L = prob.labels["n"], prob.labels["L"]
    _, _, kc, kx = prob.labels["terms"]
    shift = np.zeros(n + L)
    shift[n:] = np.max(kc + kx, axis=1)
    moved = lp.LPProblem(prob.c, prob.A_ub, prob.b_ub - prob.A_ub @ shift,
                         prob.A_eq, prob.b_eq - prob.A_eq @ shift, prob.constant + float(prob.c @ shift))
    sol = lp.solve(moved)
    if sol.ok:
        sol.x = sol.x + shift
    return sol


def _single_point(prob):
    # one member: lam = 1 is forced and each t_l sits at its epigraph floor,
    # so only feasibility is left to check
    cc, cx, kc, kx = prob.labels["terms"]
    x = np.empty(prob.n)
    x[0] = 1.0
    x[1:] = (cc + cx)[:, 0, 0] + kc[:, 0] + kx[:, 0]
    scale = np.max(np.abs(prob.A_ub), axis=1, initial=0.0)
    scale[scale == 0] = 1.0
    if np.any((prob.A_ub @ x - prob.b_ub) / scale > lp.TOL.feasibility):
        return lp.LPSolution(lp.Status.INFEASIBLE)
    return lp.LPSolution(lp.Status.OPTIMAL, x, float(prob.c @ x) + prob.constant)


def _solve_fixed(scenario, subset, agg):
    prob = build_p2(scenario, subset, agg, prune=True)
    sol = _single_point(prob) if len(subset) == 1 else _shifted_solve(prob)
    if not sol.ok:
        return P2Solution(sol.status, list(subset), agg, deadline=scenario.deadline, problem=prob)
    n = len(prob.labels["subset"])
    lam = np.zeros(scenario.n)
    frac = np.clip(sol.x[:n], 0.0, None)
    frac /= frac.sum()
    lam[prob.labels["subset"]] = frac
    cc, cx, kc, kx = prob.labels["terms"]
    per = np.einsum("ljk,k->lj", cc + cx, frac) + kc + kx
    relaxed = float(np.sum(per.max(axis=1)))
    return P2Solution(lp.Status.OPTIMAL, list(prob.labels["subset"]), agg, lam,
                      sol.objective, relaxed, scenario.deadline, prob)


def _capability_rows(scenario, subset):
    cap = np.zeros(scenario.n)
    for d in subset:
        dev = scenario.cluster.devices[d]
        cap[d] = dev.f / dev.rho
    return _largest_remainder(cap / cap.sum(), scenario.height)


def solve_p2(scenario, subset=None, aggregator=None):
    """Solve the relaxation on ``subset``.

    Without an explicit aggregator one is picked from a capability-weighted
    provisional split, then re-picked from the relaxed solution by latency
    and by energy, and finally the member with the lowest compute energy
    per KB is tried; the best of these solves is kept.  If the first choice
    is infeasible, the fastest member, the greenest member and the result
    device are tried before the subset is declared infeasible.
    """
    subset = list(range(scenario.n)) if subset is None else sorted(subset)
    if aggregator is not None:
        return _solve_fixed(scenario, subset, aggregator)
    c = scenario.cluster
    fast = subset[int(np.argmax((c.vector("f") / c.vector("rho"))[subset]))]
    green = subset[int(np.argmin((c.vector("p_c") * c.vector("rho") / c.vector("f"))[subset]))]
    agg0 = select_aggregator(scenario, _capability_rows(scenario, subset))
    sol = _solve_fixed(scenario, subset, agg0)
    tried = {agg0}
    if not sol.ok:
        # retry on the fastest member, the greenest one and the result device
        for agg in (fast, green, scenario.result_device):
            if agg in tried or agg not in subset:
                continue
            tried.add(agg)
            sol = _solve_fixed(scenario, subset, agg)
            if sol.ok:
                break
        if not sol.ok:
            return sol
    rows = _largest_remainder(sol.lam, scenario.height)
    for agg in (select_aggregator(scenario, rows), _cheapest_aggregator(scenario, rows, subset), green):
        if agg in tried:
            continue
        tried.add(agg)
        alt = _solve_fixed(scenario, subset, agg)
        if alt.ok and alt.objective < sol.objective:
            sol = alt
    return sol


def _cheapest_aggregator(scenario, a, subset):
    # member of ``subset`` spending the least energy on gathering, the
    # classifier stage and the result return, for layer-1 rows ``a``
    cluster = scenario.cluster
    geo = geometry(scenario.model, scenario.elem_bytes)
    frags = propagate_rows(scenario.model, geo.shapes, a, int(np.flatnonzero(a)[0])).fragments
    if geo.first_fc is None:
        frag_bytes, fc_kb = geo.out_row_bytes, 0.0
    else:
        frag_bytes, fc_kb = geo.row_bytes[geo.first_fc], float(np.sum(geo.layer_kb[geo.first_fc:]))
    subset = np.asarray(list(subset))
    src = np.flatnonzero(frags)
    gather = frags[src, None] * frag_bytes / _links(cluster, src[:, None], subset[None, :])
    gather[src[:, None] == subset[None, :]] = 0.0
    t_x = scenario.result_bytes / _links(cluster, subset, np.full(subset.size, scenario.result_device))
    t_x = t_x + gather.sum(axis=0)
    e = (cluster.vector("p_c") * cluster.vector("rho") / cluster.vector("f"))[subset] * fc_kb
    e = e + cluster.vector("p_x")[subset] * t_x
    return int(subset[np.argmin(e)])


def relaxed_optimum(scenario, subset=None):
    """Relaxed optimum after re-solving on the support until it stops shrinking."""
    sol = solve_p2(scenario, subset)
    while sol.ok:
        support = [d for d in sol.subset if sol.lam[d] > ZERO]
        if len(support) == len(sol.subset):
            break
        alt = solve_p2(scenario, support)
        if not alt.ok or alt.objective > sol.objective:
            break
        sol = alt
    return sol


def satisfies_threshold(lam, height, threshold):
    """Whether every active fraction followed by another active one covers the threshold."""
    lam = np.asarray(lam)
    active = lam > ZERO
    nxt = next_active(active.astype(int))
    need = active & (nxt >= 0)
    return bool(np.all(lam[need] * height >= threshold - 1e-9))


# -- rounding ----------------------------------------------------------------


def _largest_remainder(lam, height):
    quota = np.asarray(lam, dtype=float) * height
    a = np.floor(quota + 1e-9).astype(np.int64)
    rem = int(height - a.sum())
    frac = quota - a
    order = sorted(range(len(a)), key=lambda i: (-frac[i], i))
    for i in order[: max(rem, 0)]:
        a[i] += 1
    return a


def round_plan(lam, height, thresholds=0):
    """Whole rows from fractions by largest remainder, then threshold repair.

    A device left below its threshold is topped up from the device holding
    the most rows.  Raises :class:`RepairFailed` when the donor would itself
    fall below its own requirement.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < -ZERO) or abs(lam.sum() - 1.0) > 1e-6:
        raise ValueError(f"fractions must be non-negative and sum to 1, got {lam.tolist()}")
    n = len(lam)
    th = np.broadcast_to(np.asarray(thresholds, dtype=np.int64), (n,))
    a = _largest_remainder(np.clip(lam, 0, None), height)
    for _ in range(n + 1):
        nxt = next_active(a)
        short = [i for i in range(n) if a[i] > 0 and nxt[i] >= 0 and a[i] < th[i]]
        if not short:
            return a
        i = short[0]
        need = int(th[i] - a[i])
        donor = int(np.argmax(a))
        floor_ = th[donor] if nxt[donor] >= 0 else 1
        if donor == i or a[donor] - need < max(floor_, 1):
            raise RepairFailed(f"cannot lift device {i} to {th[i]} rows from {a.tolist()}")
        a[donor] -= need
        a[i] += need
    raise RepairFailed(f"repair did not converge: {a.tolist()}")


# -- aggregation -------------------------------------------------------------


def select_aggregator(scenario, a):
    """Active device minimising fragment gathering, the classifier stage and the result return."""
    model, cluster = scenario.model, scenario.cluster
    geo = geometry(model, scenario.elem_bytes)
    a = np.asarray(a, dtype=np.int64)
    active = np.flatnonzero(a)
    if active.size == 1:
        return int(active[0])
    frags = propagate_rows(model, geo.shapes, a, int(active[0])).fragments
    if geo.first_fc is None:
        frag_bytes = geo.out_row_bytes
        fc_kb = 0.0
    else:
        frag_bytes = geo.row_bytes[geo.first_fc]
        fc_kb = float(np.sum(geo.layer_kb[geo.first_fc:]))
    rd = scenario.result_device
    best, best_t = None, np.inf
    for j in active:
        dev = cluster.devices[j]
        t = dev.rho * fc_kb / dev.f + scenario.result_bytes / cluster.bandwidth(j, rd)
        for i in np.flatnonzero(frags):
            if i != j:
                t += frags[i] * frag_bytes / cluster.bandwidth(i, j)
        if t < best_t:
            best, best_t = int(j), t
    return best


# -- planners ----------------------------------------------------------------


def plan_from_rows(scenario, rows, planner, lam=None, aggregator=None, **kw):
    """Wrap integer rows as a plan; the aggregator defaults to :func:`select_aggregator`."""
    rows = np.asarray(rows, dtype=np.int64)
    if lam is None:
        lam = rows / rows.sum()
    agg = select_aggregator(scenario, rows) if aggregator is None else int(aggregator)
    return PartitionPlan(planner, tuple(float(x) for x in lam), tuple(int(r) for r in rows), agg, **kw)


def fallback_full_offload(scenario, note=""):
    """Everything on the single device with the lowest end-to-end latency."""
    h, n = scenario.height, scenario.n
    best, best_t = 0, np.inf
    for d in range(n):
        a = np.zeros(n, dtype=np.int64)
        a[d] = h
        t = total_costs(scenario, a, d).t_total
        if t < best_t:
            best, best_t = d, t
    rows = np.zeros(n, dtype=np.int64)
    rows[best] = h
    return plan_from_rows(scenario, rows, "fallback_full_offload", aggregator=best, note=note)


def plan_local(scenario):
    rows = np.zeros(scenario.n, dtype=np.int64)
    rows[scenario.cluster.master] = scenario.height
    return plan_from_rows(scenario, rows, "local")


def _proportional(scenario, weights, planner):
    """Rows in proportion to ``weights``, shrinking the device set until the split is valid.

    A device is dropped when rounding cannot lift every share to the
    neighbour threshold (the smallest share goes) or when its rows overflow
    its memory.
    """
    weights = np.asarray(weights, dtype=float)
    th = layer1_threshold(scenario.model)
    live = np.ones(scenario.n, dtype=bool)
    while live.any():
        lam = np.where(live, weights, 0.0)
        lam = lam / lam.sum()
        try:
            rows = round_plan(lam, scenario.height, th)
        except RepairFailed:
            drop = int(np.flatnonzero(live)[np.argmin(weights[live])])
        else:
            plan = plan_from_rows(scenario, rows, planner, lam=lam)
            full = _memory_overflow(scenario, plan)
            if full is None:
                return plan
            drop = full
        live[drop] = False
        log.debug("%s: dropping device %d", planner, drop)
    raise PlanInvalid(f"{planner}: no device subset yields a valid split")


def _memory_overflow(scenario, plan):
    # first device whose rows at some layer exceed its memory, or None
    geo = geometry(scenario.model, scenario.elem_bytes)
    asg = propagate_rows(scenario.model, geo.shapes, plan.rows, plan.aggregator)
    need = asg.rows * geo.row_kb[:, None]
    over = np.flatnonzero(np.any(need > scenario.cluster.vector("m")[None, :] * (1 + 1e-12), axis=0))
    return int(over[0]) if over.size else None


def plan_modnn(scenario):
    """Rows in proportion to compute throughput ``f / rho``, network-oblivious."""
    c = scenario.cluster
    return _proportional(scenario, c.vector("f") / c.vector("rho"), "modnn")


def plan_musical_chair(scenario):
    return _proportional(scenario, np.ones(scenario.n), "musical_chair")


def _round_and_check(scenario, sol, threshold, recursions):
    """Integer plan from a relaxed solution and its latency, or ``None`` if it breaks P1.

    The aggregator fixed in the relaxation is compared against the cheapest
    one for the rounded rows across the whole cluster, since shrinking the
    candidate set may have dropped a device that is only good at the
    classifier stage.  The lowest-energy candidate meeting the deadline wins;
    if none does, the relaxation's own choice is returned for tightening.
    """
    try:
        rows = round_plan(sol.lam, scenario.height, threshold)
    except RepairFailed as exc:
        log.debug("rounding repair failed: %s", exc)
        return None, None
    first = None
    best, best_e = None, np.inf
    for agg in dict.fromkeys((sol.aggregator, _cheapest_aggregator(scenario, rows, range(scenario.n)))):
        plan = plan_from_rows(scenario, rows, "coedge", lam=sol.lam, aggregator=agg,
                              lp_objective=sol.objective, recursions=recursions)
        if plan_violations(scenario, plan):
            continue
        c = total_costs(scenario, plan.rows, agg)
        if first is None:
            first = (plan, c.t_total)
        if c.t_total <= scenario.deadline and c.energy < best_e:
            best, best_e = (plan, c.t_total), c.energy
    return best or first or (None, None)


def _shrink(scenario, sol, threshold):
    """Re-solve on smaller device sets while the relaxed energy keeps falling.

    The relaxation charges every member's halo pulls whether or not it gets
    rows, so first the idle members are dropped, then the member with the
    smallest share, one at a time.
    """
    def better(alt, strict):
        return (alt.ok and satisfies_threshold(alt.lam, scenario.height, threshold)
                and (alt.objective < sol.objective if strict else alt.objective <= sol.objective))

    while True:
        support = [d for d in sol.subset if sol.lam[d] > ZERO]
        if len(support) < len(sol.subset):
            alt = solve_p2(scenario, support)
            if better(alt, strict=False):
                sol = alt
                continue
        if len(support) < 2:
            return sol
        smallest = min(support, key=lambda d: (sol.lam[d], d))
        alt = solve_p2(scenario, [d for d in support if d != smallest])
        if not better(alt, strict=True):
            return sol
        sol = alt


def _shift_rows(scenario, plan, threshold):
    """Move single rows between active devices until the deadline is met.

    Greedy descent on latency: each step applies the one-row move that cuts
    the finish time most, keeping every active share at or above the
    threshold.  Returns the first plan meeting the deadline, or ``None`` once
    no move helps.  Bounded by ``H`` steps.
    """
    rows = np.array(plan.rows, dtype=np.int64)
    active = np.flatnonzero(rows)
    floor = max(int(threshold), 1)
    agg = plan.aggregator

    def latency(a):
        try:
            return total_costs(scenario, a, agg).t_total
        except HaloSpanViolation:
            return np.inf

    t = latency(rows)
    for _ in range(scenario.height):
        best, best_t = None, t
        for i in active:
            if rows[i] <= floor:
                continue
            for j in active:
                if i == j:
                    continue
                a = rows.copy()
                a[i] -= 1
                a[j] += 1
                ta = latency(a)
                if ta < best_t:
                    best, best_t = a, ta
        if best is None:
            return None
        rows, t = best, best_t
        if t <= scenario.deadline:
            cand = plan_from_rows(scenario, rows, "coedge", lam=plan.lam, aggregator=agg,
                                  lp_objective=plan.lp_objective, recursions=plan.recursions)
            return None if plan_violations(scenario, cand) else cand
    return None


def _finalize(scenario, sol, threshold, recursions):
    sol = _shrink(scenario, sol, threshold)

    lp_scenario = scenario
    for _ in range(TIGHTEN_TRIES + 1):
        plan, t = _round_and_check(scenario, sol, threshold, recursions)
        if plan is None:
            return None
        if t <= scenario.deadline:
            return plan
        # rounding pushed the latency over the deadline: nudge rows, then tighten
        shifted = _shift_rows(scenario, plan, threshold)
        if shifted is not None:
            return shifted
        over = t - scenario.deadline
        tighter = lp_scenario.deadline - over * 1.01 - 1e-9
        if tighter <= 0:
            return None
        lp_scenario = lp_scenario.with_deadline(tighter)
        sol = solve_p2(lp_scenario, sol.subset)
        if not sol.ok or not satisfies_threshold(sol.lam, scenario.height, threshold):
            return None
    return None


def plan_coedge(scenario):
    """Threshold-based recursive partitioning with a full-offload fallback."""
    h = scenario.height
    th = layer1_threshold(scenario.model)
    cand = list(range(scenario.n))
    recursions = 0
    while cand:
        recursions += 1
        sol = solve_p2(scenario, cand)
        if not sol.ok:
            log.info("relaxation %s on devices %s", sol.status.value, cand)
            return fallback_full_offload(scenario, note=f"relaxation {sol.status.value}")
        if satisfies_threshold(sol.lam, h, th):
            plan = _finalize(scenario, sol, th, recursions)
            if plan is not None:
                return plan
        zeros = {d for d in cand if sol.lam[d] <= ZERO}
        live = [d for d in cand if d not in zeros]
        smallest = min(live, key=lambda d: (sol.lam[d], d))
        cand = [d for d in live if d != smallest]
    return fallback_full_offload(scenario, note="no candidate devices left")


PLANNERS = {
    "coedge": plan_coedge,
    "modnn": plan_modnn,
    "musical_chair": plan_musical_chair,
    "local": plan_local,
}


def run_planner(name, scenario):
    try:
        return PLANNERS[name](scenario)
    except KeyError:
        raise ValueError(f"unknown planner {name!r}; choose from {sorted(PLANNERS)}") from None


# -- validation --------------------------------------------------------------


def plan_violations(scenario, plan):
    """Constraint violations (row sum, integrality, threshold, memory) of a plan."""
    out = []
    h = scenario.height
    rows = np.asarray(plan.rows)
    lam = np.asarray(plan.lam, dtype=float)
    if rows.shape != (scenario.n,) or lam.shape != (scenario.n,):
        return [f"plan covers {rows.shape[0]} devices, cluster has {scenario.n}"]
    if np.any(rows < 0):
        out.append("negative row count")
    if int(rows.sum()) != h:
        out.append(f"rows sum to {int(rows.sum())}, height is {h}")
    if abs(lam.sum() - 1.0) > 1e-6 or np.any(lam < -ZERO):
        out.append("fractions must be non-negative and sum to 1")
    th = layer1_threshold(scenario.model)
    nxt = next_active(rows)
    for i in range(scenario.n):
        if rows[i] > 0 and nxt[i] >= 0 and rows[i] < th:
            out.append(f"device {i} holds {rows[i]} rows, below the neighbour threshold {th}")
    if out:
        return out
    geo = geometry(scenario.model, scenario.elem_bytes)
    asg = propagate_rows(scenario.model, geo.shapes, rows, plan.aggregator)
    r = asg.rows * geo.row_kb[:, None]
    for l in np.flatnonzero(geo.conv):
        try:
            _check_span(l, asg.rows[l], next_active(asg.rows[l]), int(geo.halo[l]))
        except HaloSpanViolation as exc:
            out.append(str(exc))
    mem = scenario.cluster.vector("m")
    over = np.argwhere(r > mem[None, :] * (1 + 1e-12))
    for l, i in over:
        out.append(f"layer {l} needs {r[l, i]:.1f} KB on device {i}, memory is {mem[i]:.1f} KB")
    return out


def validate_plan(scenario, plan):
    problems = plan_violations(scenario, plan)
    if problems:
        raise PlanInvalid("; ".join(problems))
    return plan


def meets_deadline(scenario, plan):
    return total_costs(scenario, plan.rows, plan.aggregator).t_total <= scenario.deadline


def plan_document(scenario, plan):
    costs = total_costs(scenario, plan.rows, plan.aggregator)
    return {
        "planner": plan.planner,
        "lambda": [float(x) for x in plan.lam],
        "rows": [int(r) for r in plan.rows],
        "aggregator": int(plan.aggregator),
        "objective_energy_j": costs.energy,
        "predicted_latency_s": costs.t_total,
        "deadline_s": scenario.deadline,
        "deadline_met": costs.t_total <= scenario.deadline,
    }
