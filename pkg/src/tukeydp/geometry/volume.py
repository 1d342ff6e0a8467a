"""Exact polytope volume by a recursive pyramid decomposition."""

from dataclasses import dataclass, field
import math

import numpy as np

from .vertices import vertex_enumeration

RANK_TOL = 1e-9


@dataclass
class VolumeEstimate:
    """Log-volume with its provenance.

    ``mode`` is ``"exact"`` or ``"pac"``; pac estimates carry the nominal
    ``(eta, beta)`` and per-phase sample counts in ``detail``.
    """

    log_volume: float
    mode: str = "exact"
    eta: float = None
    beta: float = None
    detail: dict = field(default_factory=dict)

    @property
    def volume(self):
        return math.exp(self.log_volume) if self.log_volume > -math.inf else 0.0


def _affine_basis(X):
    """Orthonormal basis (rows) of the affine span of the rows of ``X``."""
    Y = X - X.mean(axis=0)
    if Y.shape[0] == 0:
        return np.empty((0, X.shape[1]))
    _, s, vt = np.linalg.svd(Y, full_matrices=False)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > RANK_TOL * max(top, 1e-300))) if top > 0 else 0
    return vt[:rank]


def _face_volume(X, inc, idx, m, memo):
    """m-dimensional volume of the face spanned by vertices ``idx``.

    ``inc`` is the vertex/constraint incidence. Facets of the face are
    maximal vertex groups sharing a constraint with affine rank ``m - 1``;
    the face is the union of pyramids from its vertex centroid over them.
    Face volumes are intrinsic, so ridges shared by two facets are cached.
    """
    key = tuple(idx)
    if key in memo:
        return memo[key]
    pts = X[idx]
    if m == 1:
        axis = _affine_basis(pts)
        if axis.shape[0] == 0:
            memo[key] = 0.0
            return 0.0
        proj = pts @ axis[0]
        memo[key] = float(proj.max() - proj.min())
        return memo[key]
    apex = pts.mean(axis=0)
    sub = inc[idx]
    counts = sub.sum(axis=0)
    cand = np.flatnonzero((counts >= m) & (counts < len(idx)))
    groups = {tuple(idx[sub[:, j]]) for j in cand}
    facets = []
    for g in sorted(groups, key=len, reverse=True):
        if any(set(g) < set(f) for f in facets):
            continue
        facets.append(g)
    total = 0.0
    for g in facets:
        f = np.array(g)
        basis = _affine_basis(X[f])
        if basis.shape[0] != m - 1:
            continue
        r = apex - X[f[0]]
        height = float(np.linalg.norm(r - basis.T @ (basis @ r)))
        if height <= 0.0:
            continue
        total += height * _face_volume(X, inc, f, m - 1, memo) / m
    memo[key] = total
    return total


def exact_volume(P):
    """Log-volume of a bounded polytope; ``-inf`` for empty or flat bodies."""
    vs = vertex_enumeration(P)
    if len(vs) <= P.d:
        return VolumeEstimate(-math.inf)
    V = vs.vertices
    lo, hi = V.min(axis=0), V.max(axis=0)
    scale = float(np.max(hi - lo))
    if not scale > 0:
        return VolumeEstimate(-math.inf)
    if P.d == 1:
        return VolumeEstimate(math.log(scale))
    X = (V - V.mean(axis=0)) / scale
    if _affine_basis(X).shape[0] < P.d:
        return VolumeEstimate(-math.inf)
    vol = _face_volume(X, vs.active, np.arange(len(vs)), P.d, {})
    if not vol > 0:
        return VolumeEstimate(-math.inf)
    return VolumeEstimate(math.log(vol) + P.d * math.log(scale))
