"""Tukey depth over exact, random and axis-aligned direction sets.

The depth of ``y`` with respect to ``x`` under a direction set ``V`` is

    min_{v in V} |{i : <x_i, v> >= <y, v>}|.

With ``V`` the normals of all hyperplanes through ``d`` data points (both
orientations) the minimum equals the classical Tukey depth: for any direction
``v`` with ``x_m`` the l-th largest projection, the cone of directions where
``x_m`` keeps that rank is generated by such normals, so every halfspace
constraint is implied by the candidate ones.
"""

import csv
from dataclasses import dataclass
from itertools import combinations
import math

import numpy as np

from .randcore import ParameterError, _resolve, unit_sphere_direction

EXACT_DIM_CAP = 4
DEGENERACY_RTOL = 1e-9
COUNT_RTOL = 1e-9

DEPTH_KINDS = ("exact", "random", "axis")


class DegeneracyError(ValueError):
    """Every candidate hyperplane was rank deficient."""


class DatasetError(ValueError):
    """Malformed dataset input."""


def as_dataset(x, allow_empty=False):
    """Validate and return ``x`` as a float ``(n, d)`` array.

    One-dimensional input is read as ``n`` univariate samples.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DatasetError(f"dataset must be 2-D, got shape {x.shape}")
    if x.shape[1] < 1:
        raise DatasetError("dataset dimension must be >= 1")
    if x.shape[0] < 1 and not allow_empty:
        raise DatasetError("dataset must contain at least one point")
    if not np.all(np.isfinite(x)):
        raise DatasetError("dataset entries must be finite")
    return x


def load_dataset(path):
    """Read a headerless numeric CSV, one row per point."""
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise DatasetError(f"line {lineno}: non-numeric value in {row!r}") from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise DatasetError(f"line {lineno}: expected {width} columns, got {len(vals)}")
            if not all(math.isfinite(v) for v in vals):
                raise DatasetError(f"line {lineno}: non-finite value")
            rows.append(vals)
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """Unit directions defining a notion of depth.

    ``anchors`` (exact candidates only) holds, per direction, the indices of
    the ``d`` data points spanning the hyperplane it is normal to, and
    ``offsets`` the hyperplane's offset along the direction.
    """

    vectors: np.ndarray
    kind: str
    anchors: np.ndarray = None
    offsets: np.ndarray = None
    skipped: int = 0

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        object.__setattr__(self, "vectors", v)
        if self.kind not in DEPTH_KINDS:
            raise ParameterError(f"unknown direction kind {self.kind!r}")
        if v.shape[0] and not np.allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-9):
            raise ParameterError("direction vectors must be unit norm")

    @property
    def d(self):
        return self.vectors.shape[1]

    def __len__(self):
        return self.vectors.shape[0]


def random_directions(k, d, rng=None):
    """``k`` i.i.d. uniform directions on the unit sphere in R^d.

    Draws touch no data, so the set may be fixed before the dataset is read.
    """
    k = int(k)
    if k < 1:
        raise ParameterError(f"need at least one direction, got k={k}")
    return DirectionSet(unit_sphere_direction(d, _resolve(rng), size=k), "random")


def axis_aligned_directions(d):
    eye = np.eye(int(d))
    return DirectionSet(np.vstack([eye, -eye]), "axis")


def _subset_normals(diffs):
    """Generalized cross product of the rows of each ``(d-1, d)`` block."""
    m, _, d = diffs.shape
    if d == 2:
        return np.stack([-diffs[:, 0, 1], diffs[:, 0, 0]], axis=1)
    if d == 3:
        return np.cross(diffs[:, 0, :], diffs[:, 1, :])
    out = np.empty((m, d))
    for j in range(d):
        minor = np.delete(diffs, j, axis=2)
        out[:, j] = (-1) ** j * np.linalg.det(minor)
    return out


def exact_direction_candidates(x, max_dim=EXACT_DIM_CAP, rtol=DEGENERACY_RTOL):
    """Normals (both orientations) of the hyperplanes through ``d`` data points.

    Rank-deficient subsets are skipped and counted in ``skipped``.
    Hyperplanes are deduplicated up to sign, so ``d + 1`` coplanar points
    contribute one normal pair.
    """
    x = as_dataset(x)
    n, d = x.shape
    if d > max_dim:
        raise ParameterError(
            f"exact depth is capped at d <= {max_dim} (got d={d}); use random directions instead"
        )
    if d == 1:
        return DirectionSet(np.array([[1.0], [-1.0]]), "exact")
    if n < d:
        raise DegeneracyError(f"need at least d={d} points for exact candidates, got {n}")
    if d == 2:
        i, j = np.triu_indices(n, 1)
        subsets = np.stack([i, j], axis=1)
    else:
        subsets = np.array(list(combinations(range(n), d)), dtype=np.int64)
    pts = x[subsets]
    diffs = pts[:, 1:, :] - pts[:, :1, :]
    normals = _subset_normals(diffs)
    scale = np.prod(np.linalg.norm(diffs, axis=2), axis=1)
    norms = np.linalg.norm(normals, axis=1)
    ok = norms > rtol * np.maximum(scale, np.finfo(float).tiny)
    skipped = int((~ok).sum())
    if not ok.any():
        raise DegeneracyError("all candidate hyperplanes are degenerate")
    normals = normals[ok] / norms[ok, None]
    subsets = subsets[ok]
    # canonical sign: first clearly nonzero coordinate positive
    lead = np.argmax(np.abs(normals) > 1e-12, axis=1)
    sign = np.sign(normals[np.arange(len(normals)), lead])
    normals *= sign[:, None]
    offsets = np.einsum("ij,ij->i", x[subsets[:, 0]], normals)
    span = max(1.0, float(np.abs(x).max()))
    key = np.round(np.column_stack([normals, offsets / span]) / 1e-9).astype(np.int64)
    _, keep = np.unique(key, axis=0, return_index=True)
    keep.sort()
    normals, subsets, offsets = normals[keep], subsets[keep], offsets[keep]
    return DirectionSet(
        np.vstack([normals, -normals]),
        "exact",
        anchors=np.vstack([subsets, subsets]),
        offsets=np.concatenate([offsets, -offsets]),
        skipped=skipped,
    )


def make_directions(kind, x=None, d=None, k=30, rng=None):
    """Direction set of the requested kind.

    ``random`` and ``axis`` need only the dimension; ``exact`` needs the data.
    """
    if kind == "random":
        return random_directions(k, d if d is not None else as_dataset(x).shape[1], rng)
    if kind == "axis":
        return axis_aligned_directions(d if d is not None else as_dataset(x).shape[1])
    if kind == "exact":
        if x is None:
            raise ParameterError("exact candidates require the dataset")
        return exact_direction_candidates(x)
    raise ParameterError(f"unknown depth kind {kind!r}")


def _count_tol(proj):
    return COUNT_RTOL * max(1.0, float(np.abs(proj).max()) if proj.size else 1.0)


def halfspace_count(x, v, y):
    """Number of points ``x_i`` with ``<x_i, v> >= <y, v>``."""
    x = as_dataset(x, allow_empty=True)
    v = np.asarray(v, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if v.shape[0] != x.shape[1] or y.shape[0] != x.shape[1]:
        raise ParameterError("dimension mismatch between data, direction and point")
    p = x @ v
    q = float(y @ v)
    return int(np.count_nonzero(p >= q - _count_tol(np.append(p, q))))


def tukey_depth(x, y, dirs):
    """Depth of ``y`` (a point or an ``(m, d)`` batch) under ``dirs``."""
    x = as_dataset(x, allow_empty=True)
    if len(dirs) == 0:
        raise ParameterError("empty direction set")
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    if y.shape[1] != x.shape[1] or dirs.d != x.shape[1]:
        raise ParameterError("dimension mismatch between data, points and directions")
    n = x.shape[0]
    if n == 0:
        out = np.zeros(y.shape[0], dtype=np.int64)
        return int(out[0]) if single else out
    V = dirs.vectors
    P = x @ V.T
    Q = y @ V.T
    tol = _count_tol(P)
    best = np.full(y.shape[0], n, dtype=np.int64)
    chunk = max(1, int(4e6 // (n * y.shape[0])))
    for s in range(0, V.shape[0], chunk):
        c = np.count_nonzero(P[:, None, s:s + chunk] >= Q[None, :, s:s + chunk] - tol, axis=0)
        np.minimum(best, c.min(axis=1), out=best)
    return int(best[0]) if single else best
