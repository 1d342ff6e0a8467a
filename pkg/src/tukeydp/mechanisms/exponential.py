"""Exponential mechanisms over Tukey depth: BoxEM and REM with PTR."""

import math

import numpy as np

from ..depth import EXACT_DIM_CAP, as_dataset, make_directions
from ..geometry.family import (box_calibration, build_family, exact_family_volumes,
                               nested_volume_estimates)
from ..geometry.lp import bounding_box, chebyshev_center
from ..geometry.polytope import Polytope
from ..geometry.sampling import ThinPolytopeError, default_steps, hit_and_run, rejection_sample_uniform
from ..randcore import EmptySupportError, ParameterError, _resolve, laplace_sample, racing_argmin
from .accounting import split_privacy_budget
from .result import ESTIMATE, FAIL, MechanismResult

ENGINES = ("exact", "pac")
DEFAULT_SAMPLES_PER_LEVEL = 10_000


def _log1mexp(a):
    """``log(1 - exp(-a))`` for ``a > 0``."""
    return math.log(-math.expm1(-a))


def level_log_weights(log_volumes, eps_e, t, box_level_zero=None):
    """Unnormalized log-probabilities of drawing each level ``l >= t``.

    Sampling level ``l`` with these weights and then a uniform point of
    ``Y_{>=l}`` gives each point ``y`` density proportional to
    ``exp(eps_e * depth(y) / 2)``.  The telescoping that produces this
    leaves the lowest level without the ``1 - exp(-eps_e / 2)`` factor that
    every deeper level carries.

    ``log_volumes`` maps level to log-volume (a ``LevelSetFamily`` works
    too).  With ``box_level_zero=(R, d)`` level 0 is the box ``[-R, R]^d``.
    Returns a list of ``(level, log_weight)`` pairs.
    """
    if hasattr(log_volumes, "log_volumes"):
        log_volumes = {l: e.log_volume for l, e in log_volumes.log_volumes.items()}
    if not eps_e > 0:
        raise ParameterError(f"eps_e must be positive, got {eps_e}")
    t = int(t)
    lv = dict(log_volumes)
    if box_level_zero is not None:
        if t != 0:
            raise ParameterError("the box level only exists when t = 0")
        R, d = box_level_zero
        lv[0] = d * math.log(2.0 * R)
    levels = sorted(l for l in lv if l >= t)
    if not levels or levels[0] != t:
        raise ParameterError(f"log-volume of level {t} is missing")
    shrink = _log1mexp(eps_e / 2)
    out = []
    for l in levels:
        v = lv[l]
        if v == -math.inf:
            out.append((l, -math.inf))
            continue
        w = v + eps_e * l / 2
        if l > t:
            w += shrink
        out.append((l, w))
    if not any(w > -math.inf for _, w in out):
        raise EmptySupportError("every retained level has zero volume")
    return out


def approximate_distance_to_unsafety(log_volumes, t, eps_e, delta_e, top, reference_log_volume=math.inf,
                                     log_eta_ratio=0.0):
    """Lower bound ``h`` on the distance to datasets where the restricted EM is unsafe.

    Largest ``k`` in ``[0, t)`` for which some ``g >= 1`` with
    ``t + k + g + 1 <= top`` satisfies
    ``V_{t-k-1} / V_{t+k+g+1} * exp(-g eps_e / 2) <= delta_e / (4 e^eps_e)``,
    or ``-1``.  ``V_0`` is ``reference_log_volume`` (the box, or ``+inf``
    when unclipped).  With volumes known only to a factor
    ``(1 + eta) / (1 - eta)``, pass its log as ``log_eta_ratio``; the
    threshold is tightened by that factor so the result never exceeds the
    exact-volume value.  Zero inner volumes never satisfy the condition.
    """
    if hasattr(log_volumes, "log_volumes"):
        log_volumes = {l: e.log_volume for l, e in log_volumes.log_volumes.items()}
    t = int(t)
    if t < 1:
        raise ParameterError("the distance to unsafety needs a threshold t >= 1")
    if not (eps_e > 0 and 0 < delta_e < 1):
        raise ParameterError("need eps_e > 0 and 0 < delta_e < 1")
    thr = math.log(delta_e / 4) - eps_e - log_eta_ratio

    def lv(j):
        if j <= 0:
            return reference_log_volume
        return log_volumes[j]

    for k in range(t - 1, -1, -1):
        g_max = top - t - k - 1
        if g_max < 1:
            continue
        outer = lv(t - k - 1)
        if outer == math.inf:
            continue
        g = np.arange(1, g_max + 1)
        inner = np.array([log_volumes[t + k + gg + 1] for gg in g])
        ok = np.isfinite(inner) & (outer - inner - g * eps_e / 2 <= thr)
        if ok.any():
            return k
    return -1


def ptr_threshold(eps_p, delta_p):
    return math.log(1 / (2 * delta_p)) / eps_p


def ptr_check(h_tilde, eps_p, delta_p, rng=None):
    """``True`` (pass) unless ``h + Lap(1/eps_p)`` falls below ``log(1/2 delta_p) / eps_p``."""
    if not math.isfinite(h_tilde):
        raise ParameterError("h_tilde must be finite")
    noisy = h_tilde + laplace_sample(1.0 / eps_p, rng)
    return not noisy < ptr_threshold(eps_p, delta_p)


def _directions(x, depth, k, d, rng, directions):
    if directions is not None:
        return directions
    if depth == "exact" and d > EXACT_DIM_CAP:
        raise ParameterError(
            f"exact depth is capped at d <= {EXACT_DIM_CAP}; use depth='random' or 'axis'")
    return make_directions(depth, x=x, d=d, k=k, rng=rng)


def sample_level(P, engine, rng, steps=None):
    """One draw from ``P``: exact-uniform for the exact engine, hit-and-run for pac.

    Returns ``(point, used_hit_and_run)``.
    """
    d = P.d
    lo, hi = bounding_box(P)
    if d == 1:
        return rng.uniform(lo, hi), False
    if engine == "exact":
        try:
            return rejection_sample_uniform(P.with_bbox(lo, hi), rng), False
        except ThinPolytopeError:
            pass
    c, _ = chebyshev_center(P)
    steps = default_steps(d) if steps is None else int(steps)
    return hit_and_run(P, c[None, :], steps, rng)[0], True


def _family_volumes(fam, engine, rng, samples_per_level, steps, eta=None, beta=None, box_base=False):
    if engine == "exact":
        exact_family_volumes(fam)
        return
    lo, _ = fam.range
    if box_base:
        R, d = fam.box_radius, fam.d
        X = rng.uniform(-R, R, size=(samples_per_level, d))
        nested_volume_estimates(fam, fam.box_log_volume(), samples_per_level, steps, rng,
                                base_samples=X, eta=eta, beta=beta)
        return
    base, X = box_calibration(fam.levels[lo], samples_per_level, steps, rng)
    nested_volume_estimates(fam, base.log_volume, samples_per_level, steps, rng,
                            base_samples=X, eta=eta, beta=beta)


def _check_engine(engine):
    if engine not in ENGINES:
        raise ParameterError(f"unknown volume engine {engine!r}; expected one of {ENGINES}")


def rem_estimate(x, eps, delta, t=None, depth="random", k=30, engine="exact", rng=None, R=None,
                 samples_per_level=DEFAULT_SAMPLES_PER_LEVEL, steps=None, directions=None):
    """Restricted exponential mechanism over depth levels ``t..n/2`` behind a PTR test.

    ``t`` defaults to ``n // 4``.  The exact engine uses exact volumes and
    exactly uniform sampling; ``engine="pac"`` uses nested Monte Carlo
    volumes and hit-and-run, with the approximate budget split, and flags the
    result as heuristically private.  ``R`` optionally clips every level to
    ``[-R, R]^d``.
    """
    _check_engine(engine)
    rng = _resolve(rng)
    x = as_dataset(x)
    n, d = x.shape
    t = n // 4 if t is None else int(t)
    if t < 1:
        raise ParameterError("REM needs t >= 1")
    if 2 * t > n:
        raise ParameterError(f"threshold t={t} exceeds n/2 for n={n}")
    params = split_privacy_budget(eps, delta, "exact" if engine == "exact" else "approx")
    dirs = _directions(x, depth, k, d, rng, directions)
    top = n // 2
    fam = build_family(x, dirs, 1, top, R=R)
    steps_ = default_steps(d) if steps is None else int(steps)
    _family_volumes(fam, engine, rng, samples_per_level, steps_, params.eta, params.beta)
    ref = fam.box_log_volume()
    h = approximate_distance_to_unsafety(fam, t, params.eps_e, params.delta_e, top,
                                         reference_log_volume=ref,
                                         log_eta_ratio=params.log_eta_ratio)
    audit = dict(params.to_dict(), t=t, n=n, d=d, depth=dirs.kind, k=len(dirs), R=R,
                 threshold=ptr_threshold(params.eps_p, params.delta_p))
    flags = {"heuristic_privacy": engine == "pac"}
    if not ptr_check(h, params.eps_p, params.delta_p, rng):
        return MechanismResult(FAIL, h_tilde=h, params=audit, engine=engine, seed=rng.seed, flags=flags)
    try:
        weights = level_log_weights(fam, params.eps_e, t)
    except EmptySupportError:
        flags["empty_support"] = True
        return MechanismResult(FAIL, h_tilde=h, params=audit, engine=engine, seed=rng.seed, flags=flags)
    levels = [l for l, _ in weights]
    L = levels[racing_argmin([w for _, w in weights], rng)]
    y, walked = sample_level(fam.levels[L], engine, rng, steps_)
    flags["hit_and_run_sample"] = walked
    return MechanismResult(ESTIMATE, estimate=y, level=L, h_tilde=h, params=audit, engine=engine,
                           seed=rng.seed, flags=flags)


def boxem_estimate(x, eps, R, depth="exact", k=30, engine="exact", rng=None,
                   samples_per_level=DEFAULT_SAMPLES_PER_LEVEL, steps=None, directions=None,
                   univariate_shortcut=True):
    """Pure-DP exponential mechanism with score ``depth`` over the box ``[-R, R]^d``.

    The whole ``eps`` goes to the mechanism.  In one dimension with exact
    depth (the default) the call reduces to :func:`quantile_em_univariate`;
    ``univariate_shortcut=False`` forces the general polytope path.
    """
    _check_engine(engine)
    if not R > 0:
        raise ParameterError(f"box radius must be positive, got {R}")
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    rng = _resolve(rng)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    x = as_dataset(x, allow_empty=True)
    n, d = x.shape
    audit = {"eps": eps, "R": R, "n": n, "d": d, "depth": depth}
    flags = {"heuristic_privacy": engine == "pac"}
    if d == 1 and depth == "exact" and directions is None and univariate_shortcut and engine == "exact":
        y, L = _quantile_em(x[:, 0], eps, R, rng)
        return MechanismResult(ESTIMATE, estimate=[y], level=L, params=audit, engine=engine,
                               seed=rng.seed, flags=flags)
    if n == 0:
        y = rng.uniform(-R, R, size=d)
        return MechanismResult(ESTIMATE, estimate=y, level=0, params=audit, engine=engine,
                               seed=rng.seed, flags=flags)
    dirs = _directions(x, depth, k, d, rng, directions)
    audit["k"] = len(dirs)
    fam = build_family(x, dirs, 0, n // 2, R=R)
    steps_ = default_steps(d) if steps is None else int(steps)
    _family_volumes(fam, engine, rng, samples_per_level, steps_, box_base=True)
    weights = level_log_weights(fam, eps, 0)
    levels = [l for l, _ in weights]
    L = levels[racing_argmin([w for _, w in weights], rng)]
    if L == 0:
        y = rng.uniform(-R, R, size=d)
        walked = False
    else:
        y, walked = sample_level(fam.levels[L], engine, rng, steps_)
    flags["hit_and_run_sample"] = walked
    return MechanismResult(ESTIMATE, estimate=y, level=L, params=audit, engine=engine,
                           seed=rng.seed, flags=flags)


def quantile_intervals(x, R):
    """Depth upper-level sets of univariate data inside ``[-R, R]``.

    Row ``l`` (``l = 0..n//2``) is ``[x_(l), x_(n-l+1)]`` clipped to the box,
    with row 0 the box itself; empty intervals have ``lo > hi``.
    """
    xs = np.sort(np.asarray(x, dtype=float).ravel())
    n = xs.size
    top = n // 2
    lo = np.empty(top + 1)
    hi = np.empty(top + 1)
    lo[0], hi[0] = -R, R
    if top:
        l = np.arange(1, top + 1)
        lo[1:] = np.maximum(xs[l - 1], -R)
        hi[1:] = np.minimum(xs[n - l], R)
    return lo, hi


def quantile_log_weights(x, eps, R):
    lo, hi = quantile_intervals(x, R)
    with np.errstate(divide="ignore"):
        logv = np.where(hi > lo, np.log(np.maximum(hi - lo, 0.0)), -np.inf)
    l = np.arange(lo.size)
    w = logv + eps * l / 2
    w[1:] += _log1mexp(eps / 2)
    return w, lo, hi


def _quantile_em(x, eps, R, rng, size=None):
    w, lo, hi = quantile_log_weights(x, eps, R)
    L = racing_argmin(w, rng, size=size)
    y = rng.uniform(lo[L], hi[L])
    if size is None:
        return float(y), int(L)
    return np.asarray(y), np.asarray(L)


def quantile_em_univariate(x, eps, R, rng=None, size=None):
    """Exponential mechanism over univariate depth (a private median) in ``[-R, R]``.

    The same computation :func:`boxem_estimate` performs for ``d = 1``.
    ``size`` draws that many independent outputs on the same data.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        if x.shape[1] != 1:
            raise ParameterError("quantile EM needs univariate data")
        x = x[:, 0]
    if not (R > 0 and eps > 0):
        raise ParameterError("need eps > 0 and R > 0")
    if x.size and not np.all(np.isfinite(x)):
        raise ParameterError("data must be finite")
    rng = _resolve(rng)
    y, _ = _quantile_em(x, eps, R, rng, size=size)
    return y
