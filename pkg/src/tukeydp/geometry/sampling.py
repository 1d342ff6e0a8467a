"""Uniform and approximately uniform sampling from polytopes."""

import numpy as np

from ..randcore import ParameterError, _resolve, unit_sphere_direction
from .lp import bounding_box
from .polytope import UnboundedPolytopeError

MAX_REJECTIONS = 10**6
FEAS_TOL = 1e-9
# slacks are recomputed from scratch this often to stop drift
RESYNC_EVERY = 64
_TINY = 1e-300


class ThinPolytopeError(RuntimeError):
    """Rejection sampling kept missing; the body is too thin for its box."""


def default_steps(d):
    return max(1000, 10 * d**3)


def rejection_sample_uniform(P, rng=None, size=None, max_rejections=MAX_REJECTIONS,
                             return_stats=False):
    """Exactly uniform draws from ``P`` by proposing in its bounding box.

    Raises :class:`ThinPolytopeError` after ``max_rejections`` consecutive
    misses.
    """
    rng = _resolve(rng)
    lo, hi = P.bbox if P.bbox is not None else bounding_box(P)
    m = 1 if size is None else int(size)
    out = np.empty((m, P.d))
    filled = 0
    proposals = 0
    misses = 0
    batch = 256
    while filled < m:
        Y = rng.uniform(lo, hi, size=(batch, P.d))
        hits = np.flatnonzero(np.all(Y @ P.A.T <= P.b, axis=1))[: m - filled]
        if hits.size == 0:
            misses += batch
            proposals += batch
        else:
            gaps = np.diff(hits) - 1
            worst = max(misses + int(hits[0]), int(gaps.max()) if gaps.size else 0)
            if worst > max_rejections:
                misses = worst
            else:
                out[filled:filled + hits.size] = Y[hits]
                filled += hits.size
                done = filled == m
                proposals += int(hits[-1]) + 1 if done else batch
                misses = 0 if done else batch - 1 - int(hits[-1])
        if misses > max_rejections:
            raise ThinPolytopeError(
                f"{misses} consecutive rejections; use hit-and-run for this polytope")
        rate = filled / max(proposals, 1)
        batch = int(min(1 << 16, max(256, 1.2 * (m - filled) / max(rate, 1e-6))))
    res = out[0] if size is None else out
    if return_stats:
        return res, {"proposals": proposals, "accepted": m}
    return res


def _chords(S, AU):
    """Feasible step interval ``[tmin, tmax]`` along each chain's direction.

    With slacks ``S > 0`` the nearest wall ahead is at ``1 / max(AU / S)``
    and the one behind at ``1 / min(AU / S)``; plain reductions are much
    faster than masked ones.
    """
    W = AU / S
    hi = W.max(axis=1)
    lo = W.min(axis=1)
    with np.errstate(divide="ignore"):
        tmax = np.where(hi > 0, 1.0 / hi, np.inf)
        tmin = np.where(lo < 0, 1.0 / lo, -np.inf)
    return tmin, tmax


def hit_and_run(P, starts, steps, rng=None, trace=False):
    """Advance independent hit-and-run chains, one per row of ``starts``.

    Each step draws a uniform direction, computes the chord through the
    current point and moves to a uniform point on it.  Returns the final
    points, or ``(final, visited)`` with every intermediate point when
    ``trace`` is set.
    """
    rng = _resolve(rng)
    X = np.array(starts, dtype=float, ndmin=2)
    N, d = X.shape
    if d != P.d:
        raise ParameterError("start points have the wrong dimension")
    scale = max(1.0, float(np.abs(X).max()))
    S = P.b - X @ P.A.T
    if S.min() < -FEAS_TOL * scale:
        raise ParameterError("hit-and-run start point is outside the polytope")
    S = np.maximum(S, _TINY)
    visited = [X.copy()] if trace else None
    for step in range(int(steps)):
        U = unit_sphere_direction(d, rng, size=N)
        AU = U @ P.A.T
        tmin, tmax = _chords(S, AU)
        if np.any(~np.isfinite(tmin) | ~np.isfinite(tmax)):
            raise UnboundedPolytopeError("hit-and-run chord is unbounded; clip the polytope")
        short = tmax - tmin <= 1e-14 * scale
        tries = 0
        while short.any() and tries < 20:
            idx = np.flatnonzero(short)
            U[idx] = unit_sphere_direction(d, rng, size=idx.size)
            AU[idx] = U[idx] @ P.A.T
            tmin[idx], tmax[idx] = _chords(S[idx], AU[idx])
            short = tmax - tmin <= 1e-14 * scale
            tries += 1
        t = tmin + (tmax - tmin) * np.asarray(rng.random(N))
        t[short] = 0.0
        X += t[:, None] * U
        if (step + 1) % RESYNC_EVERY == 0:
            S = np.maximum(P.b - X @ P.A.T, _TINY)
        else:
            AU *= t[:, None]
            S -= AU
            np.maximum(S, _TINY, out=S)
        if trace:
            visited.append(X.copy())
    if trace:
        return X, np.stack(visited)
    return X


def hit_and_run_chain(P, start, steps=None, rng=None):
    """One approximately uniform point after ``steps`` moves from ``start``."""
    start = np.asarray(start, dtype=float)
    if steps is None:
        steps = default_steps(P.d)
    return hit_and_run(P, start[None, :], steps, rng)[0]
