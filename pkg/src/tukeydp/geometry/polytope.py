"""H-representation polytopes and Tukey upper-level sets."""

from dataclasses import dataclass

import numpy as np

from ..depth import as_dataset
from ..randcore import ParameterError

INTERIOR_MARGIN = 1e-9


class UnboundedPolytopeError(ValueError):
    """The polytope is unbounded; clip it to a box first."""


class EmptyPolytopeError(ValueError):
    """The polytope has no interior point."""


@dataclass(frozen=True, eq=False)
class Polytope:
    """The set ``{y : A y <= b}`` with unit-norm rows of ``A``.

    Zero rows with ``b >= 0`` are dropped on construction; a zero row with
    ``b < 0`` makes the polytope empty and is kept as ``0 <= b``.
    """

    A: np.ndarray
    b: np.ndarray
    bbox: tuple = None
    interior_point: np.ndarray = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape[0] != b.shape[0]:
            raise ParameterError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        norms = np.linalg.norm(A, axis=1)
        zero = norms <= 1e-300
        keep = ~zero | (b < 0)
        A, b, norms = A[keep], b[keep], norms[keep]
        nz = norms > 1e-300
        A = A.copy()
        b = b.copy()
        A[nz] /= norms[nz, None]
        b[nz] /= norms[nz]
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.interior_point is not None:
            p = np.asarray(self.interior_point, dtype=float)
            if not np.all(A @ p <= b - INTERIOR_MARGIN):
                raise ParameterError("interior_point is not strictly inside the polytope")
            object.__setattr__(self, "interior_point", p)

    @property
    def d(self):
        return self.A.shape[1]

    @property
    def k(self):
        return self.A.shape[0]

    @classmethod
    def empty(cls, d):
        """Sentinel with no points: ``y_1 <= -1`` and ``-y_1 <= -1``."""
        A = np.zeros((2, d))
        A[0, 0], A[1, 0] = 1.0, -1.0
        return cls(A, np.array([-1.0, -1.0]))

    @classmethod
    def box(cls, lo, hi):
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        d = lo.shape[0]
        eye = np.eye(d)
        return cls(np.vstack([eye, -eye]), np.concatenate([hi, -lo]), bbox=(lo.copy(), hi.copy()))

    def contains(self, y, tol=1e-9):
        """Boolean membership of ``y`` (point or batch) with slack ``tol``."""
        y = np.asarray(y, dtype=float)
        single = y.ndim == 1
        y = np.atleast_2d(y)
        ok = np.all(y @ self.A.T <= self.b + tol, axis=1)
        return bool(ok[0]) if single else ok

    def with_constraints(self, A, b):
        return Polytope(np.vstack([self.A, np.atleast_2d(A)]), np.concatenate([self.b, np.ravel(b)]))

    def with_bbox(self, lo, hi):
        return Polytope(self.A, self.b, bbox=(np.asarray(lo, float), np.asarray(hi, float)),
                        interior_point=self.interior_point)

    def to_text(self):
        """Plain-text H-rep: ``k d`` then one ``a_1 ... a_d b`` row per constraint."""
        lines = [f"{self.k} {self.d}"]
        for a, bi in zip(self.A, self.b):
            lines.append(" ".join(repr(float(v)) for v in (*a, bi)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        k, d = int(rows[0][0]), int(rows[0][1])
        body = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, d + 1)
        if body.shape[0] != k:
            raise ParameterError(f"header announces {k} constraints, found {body.shape[0]}")
        return cls(body[:, :d], body[:, d])


def quantile_offsets(x, dirs, levels):
    """``q[j, i]`` = ``levels[i]``-th largest projection of ``x`` on ``dirs[j]``.

    Levels above ``n`` get ``-inf``.
    """
    x = as_dataset(x)
    proj = np.sort(x @ dirs.vectors.T, axis=0)[::-1]  # (n, k), descending
    levels = np.asarray(levels, dtype=int)
    n = x.shape[0]
    q = np.full((dirs.vectors.shape[0], levels.shape[0]), -np.inf)
    ok = (levels >= 1) & (levels <= n)
    q[:, ok] = proj[levels[ok] - 1].T
    return q


def level_set(x, dirs, level):
    """Upper-level set ``{y : depth under dirs >= level}``.

    One constraint ``<y, v> <= q`` per direction, with ``q`` the level-th
    largest projection.  ``level > n`` returns :meth:`Polytope.empty`.
    """
    x = as_dataset(x)
    level = int(level)
    if level < 1:
        raise ParameterError(f"level must be >= 1, got {level}")
    if level > x.shape[0]:
        return Polytope.empty(x.shape[1])
    q = quantile_offsets(x, dirs, [level])[:, 0]
    return Polytope(dirs.vectors, q)


def clip_to_box(P, R):
    """Intersect ``P`` with ``[-R, R]^d``."""
    if not R > 0:
        raise ParameterError(f"box radius must be positive, got {R}")
    d = P.d
    eye = np.eye(d)
    return P.with_constraints(np.vstack([eye, -eye]), np.full(2 * d, float(R)))
