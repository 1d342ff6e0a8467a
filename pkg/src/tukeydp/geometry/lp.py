"""Dense two-phase simplex and the small LPs built on it.

Every LP here is solved in the dual form ``min b^T lam  s.t.  M lam = u,
lam >= 0``, whose constraint matrix has only ``d`` or ``d + 1`` rows no
matter how many halfspaces the polytope has.  A primal point is recovered
from the optimal basis by complementary slackness.
"""

from dataclasses import dataclass

import numpy as np

from .polytope import EmptyPolytopeError, UnboundedPolytopeError

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9
# consecutive degenerate pivots tolerated before switching to Bland's rule
DEGENERATE_RUN = 50


class LPError(RuntimeError):
    """The simplex routine did not converge."""


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: np.ndarray = None
    objective: float = None
    basis: np.ndarray = None
    rows: np.ndarray = None  # equality rows kept after dropping redundant ones


def _pivot(T, basis, r, j):
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = j


def _iterate(T, basis, ncols, max_iter):
    """Run simplex pivots on tableau ``T`` (last row: reduced costs).

    Dantzig's rule until a run of degenerate pivots, then Bland's rule for
    the rest of the solve, which rules out cycling.
    """
    m = T.shape[0] - 1
    bland = False
    run = 0
    for _ in range(max_iter):
        red = T[m, :ncols]
        neg = np.flatnonzero(red < -PIVOT_TOL)
        if neg.size == 0:
            return "optimal"
        j = int(neg[0]) if bland else int(neg[np.argmin(red[neg])])
        col = T[:m, j]
        pos = np.flatnonzero(col > PIVOT_TOL)
        if pos.size == 0:
            return "unbounded"
        ratios = T[pos, -1] / col[pos]
        best = ratios.min()
        cand = pos[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        r = int(cand[np.argmin(basis[cand])]) if bland else int(cand[0])
        if best <= PIVOT_TOL:
            run += 1
            if run >= DEGENERATE_RUN:
                bland = True
        else:
            run = 0
        _pivot(T, basis, r, j)
    raise LPError(f"simplex did not converge in {max_iter} iterations")


def linprog_standard(c, A_eq, b_eq, max_iter=None):
    """Minimize ``c^T x`` subject to ``A_eq x = b_eq``, ``x >= 0``."""
    A = np.array(A_eq, dtype=float, ndmin=2)
    b = np.array(b_eq, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    # phase 1: artificial identity basis
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(n, n + m)
    _iterate(T, basis, n + m, max_iter)
    scale = max(1.0, float(np.abs(b).max()) if m else 1.0)
    if -T[m, -1] > FEAS_TOL * scale:
        return LPResult("infeasible")

    # drive artificials out of the basis; rows where that fails are redundant
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] >= n:
            row = np.abs(T[r, :n])
            j = int(np.argmax(row))
            if row[j] > 1e-9:
                _pivot(T, basis, r, j)
            else:
                keep[r] = False
    rows = np.flatnonzero(keep)
    T2 = np.zeros((rows.size + 1, n + 1))
    T2[:-1, :n] = T[rows, :n]
    T2[:-1, -1] = T[rows, -1]
    basis = basis[rows].copy()
    T2[-1, :n] = c - c[basis] @ T2[:-1, :n]
    T2[-1, -1] = -c[basis] @ T2[:-1, -1]
    status = _iterate(T2, basis, n, max_iter)
    if status == "unbounded":
        return LPResult("unbounded")

    # polish the basic solution against the original data
    x = np.zeros(n)
    B = A[np.ix_(rows, basis)]
    try:
        x[basis] = np.linalg.solve(B, b[rows])
    except np.linalg.LinAlgError:
        x[basis] = T2[:-1, -1]
    x = np.clip(x, 0.0, None)
    return LPResult("optimal", x=x, objective=float(c @ x), basis=basis, rows=rows)


def _dual_solve(b, M, u):
    """Solve ``min b^T lam, M lam = u, lam >= 0`` and the matching primal point.

    The primal point ``w`` satisfies ``M[:, B]^T w = b_B`` on the optimal
    basis ``B`` (components on dropped redundant rows are set to zero).
    """
    res = linprog_standard(b, M, u)
    if res.status != "optimal":
        return res, None
    w = np.zeros(M.shape[0])
    K = M[res.rows][:, res.basis]
    w[res.rows] = np.linalg.lstsq(K.T, b[res.basis], rcond=None)[0]
    return res, w


def chebyshev_center(P):
    """Center and radius of the largest ball inside ``P``.

    Solves ``max r  s.t.  A c + r <= b`` through its dual
    ``min b^T lam  s.t.  A^T lam = 0, 1^T lam = 1, lam >= 0``.
    Raises :class:`EmptyPolytopeError` when no ball of positive radius
    fits and :class:`UnboundedPolytopeError` when arbitrarily large balls do.
    """
    A, b = P.A, P.b
    if A.shape[0] == 0:
        raise UnboundedPolytopeError("polytope has no constraints")
    M = np.vstack([A.T, np.ones((1, A.shape[0]))])
    u = np.zeros(M.shape[0])
    u[-1] = 1.0
    res, w = _dual_solve(b, M, u)
    if res.status == "infeasible":
        raise UnboundedPolytopeError("inscribed balls are unbounded; clip the polytope to a box")
    if res.status != "optimal":
        raise EmptyPolytopeError("polytope is empty")
    r = res.objective
    center = w[:-1]
    # r = b^T lam lives on the optimal basis; far redundant faces (a huge
    # clipping box) must not inflate the tolerance
    scale = max(1.0, float(np.abs(b[res.basis]).max()))
    if not r > FEAS_TOL * scale:
        raise EmptyPolytopeError(f"polytope has empty interior (inradius {r:.3g})")
    # guard against loss of accuracy in the recovered center
    slack = b - A @ center
    if slack.min() < 0.5 * r:
        center = _polish_center(A, b, center, r)
    return center, r


def _polish_center(A, b, c, r):
    # active rows at the recovered center define it; re-solve in least squares
    act = np.flatnonzero(np.abs(b - A @ c - r) <= 1e-6 * max(1.0, abs(r)))
    if act.size:
        K = np.hstack([A[act], np.ones((act.size, 1))])
        sol = np.linalg.lstsq(K, b[act], rcond=None)[0]
        c2 = sol[:-1]
        if (b - A @ c2).min() > (b - A @ c).min():
            return c2
    return c


def support(P, u):
    """``max_{y in P} <u, y>`` and a maximizer; ``(inf, None)`` if unbounded.

    Assumes ``P`` is nonempty (check with :func:`chebyshev_center`).
    """
    A, b = P.A, P.b
    u = np.asarray(u, dtype=float)
    res, w = _dual_solve(b, A.T, u)
    if res.status == "infeasible":
        return np.inf, None
    if res.status != "optimal":
        raise EmptyPolytopeError("polytope is empty")
    return res.objective, w


def bounding_box(P):
    """Axis-aligned bounding box ``(lo, hi)`` from ``2d`` support LPs."""
    d = P.d
    lo, hi = np.empty(d), np.empty(d)
    eye = np.eye(d)
    for j in range(d):
        top, _ = support(P, eye[j])
        bot, _ = support(P, -eye[j])
        if not (np.isfinite(top) and np.isfinite(bot)):
            raise UnboundedPolytopeError(f"polytope is unbounded along axis {j}")
        lo[j], hi[j] = -bot, top
    return lo, hi


def is_bounded(P):
    """True iff every support value of the (nonempty) polytope is finite."""
    try:
        bounding_box(P)
    except UnboundedPolytopeError:
        return False
    return True
