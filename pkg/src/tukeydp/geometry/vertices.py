"""H- to V-representation conversion."""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.spatial import HalfspaceIntersection
from scipy.spatial import QhullError

from .lp import bounding_box, chebyshev_center
from .polytope import EmptyPolytopeError

DEDUP_TOL = 1e-7
ACTIVE_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class VertexSet:
    """Vertices of a polytope with, per vertex, the constraints active at it.

    ``active`` is a boolean ``(m, k)`` incidence matrix against the rows of
    the polytope's ``A``.
    """

    vertices: np.ndarray
    active: np.ndarray

    def __len__(self):
        return self.vertices.shape[0]


def _empty(P):
    return VertexSet(np.empty((0, P.d)), np.empty((0, P.k), dtype=bool))


def _dedup(V, scale):
    """Merge points closer than ``DEDUP_TOL`` (after dividing by ``scale``)."""
    if V.shape[0] <= 1:
        return V
    Z = V / scale
    order = np.lexsort(Z.T[::-1])
    Z, V = Z[order], V[order]
    keep = []
    for i in range(Z.shape[0]):
        # lexicographic sort puts near-duplicates close but not always adjacent
        if keep:
            K = Z[keep[-64:]]
            if np.any(np.max(np.abs(K - Z[i]), axis=1) <= DEDUP_TOL):
                continue
        keep.append(i)
    return V[keep]


def _incidence(P, V, scale):
    resid = np.abs(V @ P.A.T - P.b)
    return resid <= ACTIVE_TOL * scale


def _finish(P, V):
    scale = max(1.0, float(np.abs(V).max()))
    V = _dedup(V, scale)
    inc = _incidence(P, V, scale)
    # drop spurious points that are not on at least d hyperplanes
    ok = inc.sum(axis=1) >= P.d
    return VertexSet(V[ok], inc[ok])


def vertices_bruteforce(P):
    """Vertices by solving every ``d``-subset of constraints (slow oracle)."""
    d = P.d
    if P.k < d:
        return _empty(P)
    try:
        chebyshev_center(P)
    except EmptyPolytopeError:
        return _empty(P)
    bounding_box(P)
    pts = []
    for S in combinations(range(P.k), d):
        M = P.A[list(S)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        v = np.linalg.solve(M, P.b[list(S)])
        if np.all(P.A @ v <= P.b + ACTIVE_TOL * max(1.0, float(np.abs(v).max()))):
            pts.append(v)
    if not pts:
        return _empty(P)
    return _finish(P, np.array(pts))


def vertex_enumeration(P):
    """All vertices of a bounded polytope.

    Empty or lower-dimensional polytopes give an empty set; unbounded ones
    raise :class:`~tukeydp.geometry.polytope.UnboundedPolytopeError`.
    """
    d = P.d
    try:
        center, _ = chebyshev_center(P)
    except EmptyPolytopeError:
        return _empty(P)
    lo, hi = bounding_box(P)
    if d == 1:
        V = np.array([[lo[0]], [hi[0]]])
        return _finish(P, V)
    # qhull works on the translated system so the interior point is the origin
    span = max(1.0, float(np.max(hi - lo)))
    b_shift = (P.b - P.A @ center) / span
    halfspaces = np.hstack([P.A, -b_shift[:, None]])
    try:
        hs = HalfspaceIntersection(halfspaces, np.zeros(d))
    except QhullError:
        if P.k <= 40:
            return vertices_bruteforce(P)
        raise
    V = hs.intersections * span + center
    V = V[np.all(np.isfinite(V), axis=1)]
    return _finish(P, V)
