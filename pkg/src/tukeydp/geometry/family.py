"""Nested families of Tukey upper-level sets and their volumes."""

from dataclasses import dataclass, field
import math

import numpy as np

from ..depth import COUNT_RTOL, as_dataset
from ..randcore import ParameterError, _resolve
from .lp import bounding_box, chebyshev_center
from .polytope import EmptyPolytopeError, Polytope, clip_to_box, quantile_offsets
from .sampling import _chords, default_steps, hit_and_run
from ..randcore import unit_sphere_direction
from .volume import VolumeEstimate, exact_volume

NEST_TOL = 1e-7


class NestingError(RuntimeError):
    """A sample of an inner level fell outside the enclosing level."""


@dataclass
class LevelSetFamily:
    """Upper-level sets ``levels[l]`` for consecutive ``l`` with their volumes.

    With ``box_radius`` set every level is clipped to ``[-R, R]^d`` and level
    0 is the box itself.
    """

    levels: dict
    directions: object
    n: int
    d: int
    box_radius: float = None
    log_volumes: dict = field(default_factory=dict)

    @property
    def top(self):
        return self.n // 2

    @property
    def range(self):
        return min(self.levels), max(self.levels)

    def box_log_volume(self):
        if self.box_radius is None:
            return math.inf
        return self.d * math.log(2.0 * self.box_radius)

    def log_volume(self, level):
        """Log-volume of ``levels[level]``; levels past ``n`` are empty."""
        if level > self.n:
            return -math.inf
        return self.log_volumes[level].log_volume

    def mode(self):
        modes = {v.mode for v in self.log_volumes.values()}
        return modes.pop() if len(modes) == 1 else "mixed"


def exact_relevance(x, dirs):
    """Per exact-candidate direction, the range of levels it constrains.

    A candidate hyperplane with ``a`` points strictly above it and ``c`` on
    it bounds the level-``l`` set exactly when ``a < l <= a + c``; at other
    levels the quantile constraint along that normal is implied by the
    others.  Returns ``(first, last)`` arrays.
    """
    x = as_dataset(x)
    V, off = dirs.vectors, dirs.offsets
    n = x.shape[0]
    tol = COUNT_RTOL * max(1.0, float(np.abs(x).max()))
    above = np.empty(len(V), dtype=np.int64)
    ties = np.empty(len(V), dtype=np.int64)
    chunk = max(1, int(4e6 // n))
    for s in range(0, len(V), chunk):
        P = x @ V[s:s + chunk].T - off[s:s + chunk]
        above[s:s + chunk] = np.count_nonzero(P > tol, axis=0)
        ties[s:s + chunk] = np.count_nonzero(np.abs(P) <= tol, axis=0)
    return above + 1, above + ties


def build_family(x, dirs, lo, hi=None, R=None):
    """Polytopes ``Y_{>=l}`` for ``l = lo..hi`` (default ``hi = n // 2``).

    Exact-candidate direction sets with anchors use only the constraints
    relevant at each level; other sets use one quantile constraint per
    direction.  ``R`` clips every level to the box, and level 0 is then the
    box.
    """
    x = as_dataset(x, allow_empty=R is not None)
    n, d = x.shape
    hi = n // 2 if hi is None else int(hi)
    lo = int(lo)
    if lo < 0 or lo > max(hi, 0):
        raise ParameterError(f"invalid level range {lo}..{hi}")
    if lo == 0 and R is None:
        raise ParameterError("level 0 is only defined inside a box")
    levels = {}
    box = Polytope.box(-np.full(d, float(R)), np.full(d, float(R))) if R is not None else None
    if lo == 0:
        levels[0] = box
    wanted = [l for l in range(max(lo, 1), hi + 1)]
    if wanted:
        if dirs.anchors is not None:
            first, last = exact_relevance(x, dirs)
            for l in wanted:
                rows = (first <= l) & (l <= last)
                P = Polytope(dirs.vectors[rows], dirs.offsets[rows]) if rows.any() else None
                levels[l] = P
        else:
            q = quantile_offsets(x, dirs, wanted)
            for i, l in enumerate(wanted):
                levels[l] = Polytope(dirs.vectors, q[:, i]) if np.all(np.isfinite(q[:, i])) else None
        for l in wanted:
            if levels[l] is None:
                # no constraint at all: the whole space, or the box when clipped
                levels[l] = box if R is not None else Polytope(np.empty((0, d)), np.empty(0))
            if R is not None and levels[l] is not box:
                levels[l] = clip_to_box(levels[l], R)
    return LevelSetFamily(levels, dirs, n, d, box_radius=R)


def _is_empty(P):
    try:
        chebyshev_center(P)
    except EmptyPolytopeError:
        return True
    return False


def exact_family_volumes(family):
    """Fill ``family.log_volumes`` with exact volumes, outermost level first.

    Once a level is empty every deeper level is too, so the scan stops there.
    """
    lo, hi = family.range
    empty_from = None
    for l in range(lo, hi + 1):
        P = family.levels[l]
        if empty_from is not None:
            family.log_volumes[l] = VolumeEstimate(-math.inf)
            continue
        if l == 0 and family.box_radius is not None:
            family.log_volumes[l] = VolumeEstimate(family.box_log_volume())
            continue
        est = exact_volume(P)
        family.log_volumes[l] = est
        if est.log_volume == -math.inf and _is_empty(P):
            empty_from = l
    return family.log_volumes


def _refill(X, body, N, steps, rng):
    """``N`` points in ``body`` from the uniform subsample ``X``.

    Every point of ``X`` is kept as is; duplicates fill the rest and take
    ``steps`` hit-and-run moves to decorrelate from their originals.  The
    walk leaves the uniform law invariant, so the moved copies stay uniform.
    """
    m = X.shape[0]
    if m >= N:
        return X[:N]
    extra = X[rng.integers(0, m, size=N - m)]
    if steps > 0:
        extra = hit_and_run(body, extra, steps, rng)
    return np.vstack([X, extra])


def _relaxed(outer, inner, s):
    """``outer`` intersected with ``inner`` loosened by ``s``."""
    if outer.A.shape == inner.A.shape and np.array_equal(outer.A, inner.A):
        return Polytope(outer.A, np.minimum(outer.b, inner.b + s))
    return outer.with_constraints(inner.A, inner.b + s)


def _violation(P, X):
    if X.shape[0] == 0:
        return np.empty(0)
    return np.max(X @ P.A.T - P.b, axis=1)


def chord_fraction(body, A_in, b_in, X, n_dirs, rng):
    """Mean fraction of random chords of ``body`` through ``X`` inside ``{A_in y <= b_in}``.

    For ``X`` uniform on ``body`` this is an unbiased estimate of the volume
    ratio: a hit-and-run move from ``X`` is uniform on the body and lands
    inside with probability equal to the chord fraction.  Averaging the
    fractions instead of indicators removes most of the binomial noise.
    """
    N, d = X.shape
    total = 0.0
    S_out = np.maximum(body.b - X @ body.A.T, 1e-300)
    S_in = b_in - X @ A_in.T
    for _ in range(int(n_dirs)):
        U = unit_sphere_direction(d, rng, size=N)
        lo, hi = _chords(S_out, U @ body.A.T)
        AU = U @ A_in.T
        with np.errstate(divide="ignore", invalid="ignore"):
            R = S_in / AU
        a = np.max(np.where(AU < 0, R, -np.inf), axis=1)
        b = np.min(np.where(AU > 0, R, np.inf), axis=1)
        blocked = np.any((AU == 0) & (S_in < 0), axis=1)
        inside = np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)
        inside[blocked] = 0.0
        total += float(np.mean(inside / (hi - lo)))
    return total / n_dirs


def nested_step(outer, inner, X, steps, rng, min_fraction=0.1, split_fraction=0.5,
                max_splits=400, chord_dirs=4):
    """Estimate ``log Vol(inner) - log Vol(outer)`` from uniform samples ``X``.

    The hit fraction of ``X`` in ``inner`` estimates the ratio when it is at
    least ``min_fraction``.  Below that, the step inserts relaxed bodies
    ``outer ∩ {A_in y <= b_in + s}`` with ``s`` at the ``split_fraction``
    quantile of the samples' violation (adaptive multilevel splitting).
    Each ratio is estimated by :func:`chord_fraction` over ``chord_dirs``
    directions per sample (``chord_dirs=0`` uses the plain hit fraction).
    Returns ``(log_ratio, samples_in_inner, detail)``; the log ratio is
    ``-inf`` when ``inner`` has no interior.
    """
    N = X.shape[0]
    if _is_empty(inner):
        return -math.inf, None, {"empty": True, "splits": 0, "hits": 0, "samples": N}
    # round-off in A y - b follows |y|, not the largest (possibly redundant) offset
    scale = max(1.0, float(np.abs(X).max()))
    tol = 1e-12 * scale
    log_ratio = 0.0
    splits = 0
    g = _violation(inner, X)
    body = outer

    def ratio(keep, s):
        if chord_dirs:
            return chord_fraction(body, inner.A, inner.b + s, X, chord_dirs, rng)
        return keep.mean()

    while True:
        hit = g <= tol
        frac = hit.mean()
        if frac >= min_fraction:
            log_ratio += math.log(ratio(hit, 0.0))
            hits = int(hit.sum())
            X = _refill(X[hit], inner, N, steps, rng)
            break
        if splits >= max_splits:
            return -math.inf, None, {"empty": False, "splits": splits, "hits": 0,
                                     "samples": N, "exhausted": True}
        s = float(np.quantile(g, split_fraction))
        keep = g <= s
        log_ratio += math.log(ratio(keep, s))
        body = _relaxed(outer, inner, s)
        X = _refill(X[keep], body, N, steps, rng)
        g = _violation(inner, X)
        splits += 1
    bad = _violation(outer, X)
    if bad.size and bad.max() > NEST_TOL * max(1.0, float(np.abs(X).max())):
        raise NestingError(
            f"inner-level sample violates the enclosing level by {bad.max():.3g}")
    return log_ratio, X, {"empty": False, "splits": splits, "hits": hits, "samples": N}


def box_calibration(P, samples, steps, rng=None, min_fraction=0.1):
    """Log-volume of ``P`` relative to its LP bounding box, plus uniform samples.

    Box draws are exactly uniform; the ratio to ``P`` goes through
    :func:`nested_step`, so thin bodies are handled by splitting rather than
    by an astronomically long rejection loop.
    """
    rng = _resolve(rng)
    lo, hi = bounding_box(P)
    width = hi - lo
    if np.any(width <= 0):
        return VolumeEstimate(-math.inf, mode="pac"), None
    box = Polytope.box(lo, hi)
    X = rng.uniform(lo, hi, size=(int(samples), P.d))
    lr, Y, detail = nested_step(box, P, X, steps, rng, min_fraction=min_fraction)
    detail = dict(detail, base="bbox")
    return VolumeEstimate(float(np.sum(np.log(width))) + lr, mode="pac", detail=detail), Y


def nested_volume_estimates(family, base_log_volume, samples_per_level, steps=None, rng=None,
                            base_samples=None, eta=None, beta=None, min_fraction=0.1):
    """Approximate log-volumes of every level by chaining volume ratios.

    ``base_log_volume`` is the log-volume of the outermost level and
    ``base_samples`` optional uniform draws from it (when absent, chains
    start at its Chebyshev center and burn in for ``default_steps(d)``).
    ``steps`` hit-and-run moves refresh the samples after each ratio.
    Levels with no interior get ``-inf`` with ``detail['empty']`` set.
    """
    rng = _resolve(rng)
    lo, hi = family.range
    N = int(samples_per_level)
    if N < 1:
        raise ParameterError("samples_per_level must be positive")
    steps = default_steps(family.d) if steps is None else int(steps)
    outer = family.levels[lo]
    out = {}
    if base_samples is None:
        if base_log_volume == -math.inf:
            X = None
        else:
            c, _ = chebyshev_center(outer)
            X = hit_and_run(outer, np.tile(c, (N, 1)), default_steps(family.d), rng)
    else:
        X = np.asarray(base_samples, dtype=float)
        if X.shape[0] != N:
            X = _refill(X, outer, N, 0, rng)
    out[lo] = VolumeEstimate(float(base_log_volume), mode="pac", eta=eta, beta=beta,
                             detail={"samples": N, "base": True})
    cur = float(base_log_volume)
    for l in range(lo + 1, hi + 1):
        inner = family.levels[l]
        if X is None or cur == -math.inf:
            out[l] = VolumeEstimate(-math.inf, mode="pac", eta=eta, beta=beta,
                                    detail={"empty": True, "samples": 0})
            X = None
            continue
        lr, X, detail = nested_step(outer, inner, X, steps, rng, min_fraction=min_fraction)
        cur = cur + lr
        out[l] = VolumeEstimate(cur, mode="pac", eta=eta, beta=beta, detail=dict(detail, steps=steps))
        outer = inner
    family.log_volumes.update(out)
    return out
