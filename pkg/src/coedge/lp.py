"""Dense two-phase simplex for small linear programs.

Solves ``min c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0``.
Pricing is Dantzig's rule until a run of degenerate pivots is seen, after
which Bland's rule (lowest index) takes over, which rules out cycling.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvariantViolation, NumericalBreakdown

__all__ = ["Tolerances", "TOL", "Status", "LPProblem", "LPSolution", "solve"]


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-7
    pivot: float = 1e-11
    objective_rel: float = 1e-6
    optimality: float = 1e-10
    degenerate_run: int = 8


TOL = Tolerances()


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LPProblem:
    c: np.ndarray
    A_ub: np.ndarray = None
    b_ub: np.ndarray = None
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None
    constant: float = 0.0
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_ub, self.b_ub = _block(self.A_ub, self.b_ub, n, "A_ub")
        self.A_eq, self.b_eq = _block(self.A_eq, self.b_eq, n, "A_eq")
        for name in ("c", "A_ub", "b_ub", "A_eq", "b_eq"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvariantViolation(name, "coefficients must be finite")

    @property
    def n(self):
        return self.c.size


def _block(A, b, n, name):
    if A is None:
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[0] == 0:
        A = A.reshape(0, n)
    if A.shape[1] != n or b.size != A.shape[0]:
        raise InvariantViolation(name, f"shape {A.shape} / rhs {b.size} inconsistent with {n} variables")
    return A, b


@dataclass
class LPSolution:
    status: Status
    x: np.ndarray = None
    objective: float = None
    ray: np.ndarray = None
    iterations: int = 0

    @property
    def ok(self):
        return self.status is Status.OPTIMAL


def _pivot(T, r, c):
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= col[:, None] * T[r]


def _run(T, basis, n_cols, tol, allowed):
    """Simplex iterations on tableau ``T`` whose last row is the cost row.

    Returns ``None`` at optimality, or the entering column of an unbounded ray.
    """
    m = T.shape[0] - 1
    degenerate = 0
    iters = 0
    limit = 50 * (m + n_cols) + 1000
    cost_scale = float(np.max(np.abs(T[-1, :n_cols]))) or 1.0
    thresh = -tol.optimality * cost_scale
    idx = np.flatnonzero(allowed)
    body, rhs = T[:m], T[:m, -1]
    while True:
        iters += 1
        if iters > limit:
            raise NumericalBreakdown("simplex iteration limit reached")
        d = T[-1, idx]
        bland = degenerate >= tol.degenerate_run
        if bland:
            neg = (d < thresh).nonzero()[0]
            if neg.size == 0:
                return None, iters
            e = int(idx[neg[0]])
        else:
            k = int(np.argmin(d))
            if d[k] >= thresh:
                return None, iters
            e = int(idx[k])
        col = body[:, e]
        pos = (col > tol.pivot).nonzero()[0]
        if pos.size == 0:
            return e, iters
        ratios = rhs[pos] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        if ties.size == 1:
            r = int(ties[0])
        elif bland:
            r = int(ties[np.argmin(basis[ties])])
        else:
            r = int(ties[np.argmax(col[ties])])
        degenerate = degenerate + 1 if best <= tol.feasibility else 0
        _pivot(T, r, e)
        basis[r] = e


def solve(problem, tol=TOL):
    """Solve ``problem``; status is optimal, infeasible or unbounded."""
    c = problem.c
    n = c.size
    A = np.vstack([problem.A_ub, problem.A_eq])
    b = np.concatenate([problem.b_ub, problem.b_eq])
    m_ub = problem.A_ub.shape[0]
    m = A.shape[0]

    # row scaling for conditioning
    scale = np.max(np.abs(A), axis=1) if m else np.zeros(0)
    scale[scale == 0] = 1.0
    A = A / scale[:, None]
    b = b / scale

    # rows with all-zero coefficients are either trivially true or infeasible
    zero = np.all(A == 0, axis=1)
    if np.any(zero):
        bad_ub = zero[:m_ub] & (b[:m_ub] < -tol.feasibility)
        bad_eq = zero[m_ub:] & (np.abs(b[m_ub:]) > tol.feasibility)
        if np.any(bad_ub) or np.any(bad_eq):
            return LPSolution(Status.INFEASIBLE)
        keep = ~zero
        A, b = A[keep], b[keep]
        m_ub = int(np.sum(keep[:m_ub]))
        m = A.shape[0]

    if m == 0:
        if np.any(c < 0):
            ray = np.zeros(n)
            ray[int(np.argmin(c))] = 1.0
            return LPSolution(Status.UNBOUNDED, ray=ray)
        x = np.zeros(n)
        return LPSolution(Status.OPTIMAL, x, float(problem.constant), iterations=0)

    # columns: x (n) | slacks (m_ub) | artificials (m) | rhs
    sign = np.where(b < 0, -1.0, 1.0)
    n_slack = m_ub
    needs_art = np.ones(m, dtype=bool)
    needs_art[:m_ub] = sign[:m_ub] < 0
    art_rows = np.flatnonzero(needs_art)
    n_struct = n + n_slack
    n_cols = n_struct + art_rows.size
    T = np.zeros((m + 1, n_cols + 1))
    T[:m, :n] = A * sign[:, None]
    T[np.arange(m_ub), n + np.arange(m_ub)] = sign[:m_ub]
    T[:m, -1] = b * sign
    basis = n + np.arange(m, dtype=np.int64)
    art_cols = n_struct + np.arange(art_rows.size)
    T[art_rows, art_cols] = 1.0
    basis[art_rows] = art_cols
    iters = 0

    if art_cols.size:
        T[-1, art_cols] = 1.0
        T[-1] -= T[:m][basis >= n_struct].sum(axis=0)
        allowed = np.ones(n_cols, dtype=bool)
        _, it = _run(T, basis, n_cols, tol, allowed)
        iters += it
        # judge each artificial against its own row, so one large right-hand
        # side cannot mask a small violation elsewhere
        in_basis = np.flatnonzero(basis >= n_struct)
        origin = art_rows[basis[in_basis] - n_struct]
        left = T[in_basis, -1]
        if np.any(left > tol.feasibility * np.maximum(1.0, np.abs(b[origin]))):
            return LPSolution(Status.INFEASIBLE, iterations=iters)
        # drive remaining artificials out of the basis
        is_art = basis >= n_struct
        drop = []
        for r in np.flatnonzero(is_art):
            row = T[r, :n_struct]
            cand = np.flatnonzero(np.abs(row) > 1e-9)
            if cand.size:
                e = int(cand[np.argmax(np.abs(row[cand]))])
                _pivot(T, r, e)
                basis[r] = e
            else:
                drop.append(r)
        if drop:
            keep = np.ones(m + 1, dtype=bool)
            keep[drop] = False
            T = T[keep]
            basis = basis[keep[:-1]]
            m = T.shape[0] - 1

    # phase 2
    T[-1, :] = 0.0
    T[-1, :n] = c
    for i in range(m):
        if basis[i] < n and c[basis[i]] != 0:
            T[-1] -= c[basis[i]] * T[i]
    allowed = np.zeros(n_cols, dtype=bool)
    allowed[:n_struct] = True
    e, it = _run(T, basis, n_cols, tol, allowed)
    iters += it
    if e is not None:
        ray = np.zeros(n_cols)
        ray[e] = 1.0
        for i in range(m):
            ray[basis[i]] = -T[i, e]
        return LPSolution(Status.UNBOUNDED, ray=ray[:n], iterations=iters)

    x_full = np.zeros(n_cols)
    x_full[basis] = T[:m, -1]
    x = x_full[:n]
    x[np.abs(x) < 1e-13] = 0.0
    _certify(problem, x, tol)
    return LPSolution(Status.OPTIMAL, x, float(c @ x + problem.constant), iterations=iters)


def _certify(problem, x, tol):
    if np.any(x < -1e-9):
        raise NumericalBreakdown(f"negative component {x.min():.3e} in optimal point")
    for A, b, eq in ((problem.A_ub, problem.b_ub, False), (problem.A_eq, problem.b_eq, True)):
        if not b.size:
            continue
        s = np.max(np.abs(A), axis=1)
        s[s == 0] = 1.0
        res = (A @ x - b) / s
        worst = np.max(np.abs(res)) if eq else np.max(res)
        if worst > tol.feasibility:
            raise NumericalBreakdown(f"constraint residual {worst:.3e} exceeds tolerance")
