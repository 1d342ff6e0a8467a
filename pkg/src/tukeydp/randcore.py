"""Randomness primitives shared by every mechanism.

All draws go through a :class:`RandomSource`.  A source is either *seeded*
(backed by numpy's PCG64, reproducible, meant for experiments) or *secure*
(uniform bits read from the operating system CSPRNG).  Privacy-critical code
defaults to the secure kind when no seed is supplied.

Floating-point side channels of the noise samplers are not addressed here.
"""

import math
import os

import numpy as np

SEED_ENV_VAR = "TUKEY_DP_SEED"

_TWO_POW_M53 = 2.0 ** -53


class ParameterError(ValueError):
    """Raised for out-of-range arguments."""


class EmptySupportError(ValueError):
    """Raised when a sampling distribution has no mass."""


class _SecureBackend:
    """Subset of the ``numpy.random.Generator`` interface fed by ``os.urandom``."""

    def random(self, size=None):
        m = 1 if size is None else int(np.prod(size))
        raw = np.frombuffer(os.urandom(8 * m), dtype=np.uint64)
        u = (raw >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53
        return float(u[0]) if size is None else u.reshape(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        low, high = np.asarray(low, dtype=float), np.asarray(high, dtype=float)
        if size is None:
            size = np.broadcast(low, high).shape or None
        u = self.random(size)
        out = low + (high - low) * u
        return float(out) if size is None else out

    def standard_normal(self, size=None):
        shape = () if size is None else size
        m = int(np.prod(shape)) if shape != () else 1
        # Box-Muller on (0, 1] x [0, 1)
        u1 = 1.0 - self.random(m)
        u2 = self.random(m)
        z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        return float(z[0]) if size is None else z.reshape(shape)

    def integers(self, low, high=None, size=None):
        if high is None:
            low, high = 0, low
        u = self.random(size)
        out = np.floor(low + (high - low) * np.asarray(u)).astype(np.int64)
        return int(out) if size is None else out

    def permutation(self, n):
        return np.argsort(self.random(int(n)), kind="stable")


class RandomSource:
    """Owner of a random stream.

    ``RandomSource(seed)`` gives a reproducible stream; ``RandomSource()`` gives
    a secure one.  Instances must not be shared across concurrent tasks; use
    :meth:`spawn` to derive independent seeded children.
    """

    def __init__(self, seed=None):
        if seed is None:
            self.kind = "secure"
            self.seed = None
            self._gen = _SecureBackend()
        else:
            seed = int(seed)
            if not 0 <= seed < 2 ** 64:
                raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
            self.kind = "seeded"
            self.seed = seed
            self._gen = np.random.default_rng(seed)
        self._spawn_key = ()

    @classmethod
    def from_env(cls, seed=None):
        """Seeded source from ``seed`` or ``$TUKEY_DP_SEED``; secure otherwise."""
        if seed is None:
            env = os.environ.get(SEED_ENV_VAR)
            if env not in (None, ""):
                seed = int(env)
        return cls(seed)

    def spawn(self, *key):
        """Child source determined by ``(seed, *key)``.

        Secure parents yield secure children.
        """
        if self.kind == "secure":
            return RandomSource()
        child = RandomSource.__new__(RandomSource)
        child.kind = "seeded"
        child.seed = self.seed
        child._spawn_key = self._spawn_key + tuple(int(k) for k in key)
        ss = np.random.SeedSequence(self.seed, spawn_key=child._spawn_key)
        child._gen = np.random.Generator(np.random.PCG64(ss))
        return child

    def __repr__(self):
        if self.kind == "secure":
            return "RandomSource(secure)"
        return f"RandomSource(seed={self.seed}, key={self._spawn_key})"

    # thin delegation to the backend
    def random(self, size=None):
        return self._gen.random(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def permutation(self, n):
        return self._gen.permutation(n)

    def choice_without_replacement(self, n, k):
        """``k`` distinct indices from ``range(n)``, uniformly at random."""
        return np.sort(self.permutation(n)[:k])

    def open_uniform(self, size=None):
        """Uniform draws on the open interval (0, 1)."""
        u = np.atleast_1d(np.asarray(self.random(size), dtype=float))
        bad = (u <= 0.0) | (u >= 1.0)
        while bad.any():
            u[bad] = self.random(int(bad.sum()))
            bad = (u <= 0.0) | (u >= 1.0)
        return float(u[0]) if size is None else u.reshape(size)


def _resolve(rng):
    if rng is None:
        return RandomSource()
    if isinstance(rng, RandomSource):
        return rng
    return RandomSource(rng)


def laplace_sample(scale, rng=None, size=None):
    """Draw from the Laplace density ``exp(-|z|/scale) / (2 scale)``."""
    if not scale > 0 or not math.isfinite(scale):
        raise ParameterError(f"Laplace scale must be positive and finite, got {scale}")
    rng = _resolve(rng)
    u = np.asarray(rng.open_uniform(size)) - 0.5
    z = -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))
    return float(z) if size is None else z


def racing_argmin(log_weights, rng=None, size=None):
    """Sample an index with probability proportional to ``exp(log_weights)``.

    Computes ``argmin_l log(log(1/U_l)) - log_weights[l]`` for i.i.d. uniforms,
    so the weights are never exponentiated.  Entries equal to ``-inf`` are
    never selected.
    """
    lw = np.asarray(log_weights, dtype=float).ravel()
    if lw.size == 0 or not np.any(lw > -np.inf):
        raise EmptySupportError("all log-weights are -inf")
    if np.any(np.isnan(lw)) or np.any(lw == np.inf):
        raise ParameterError("log-weights must be finite or -inf")
    rng = _resolve(rng)
    m = 1 if size is None else int(size)
    u = rng.open_uniform((m, lw.size))
    z = np.log(-np.log(u)) - lw
    idx = np.argmin(z, axis=1)
    return int(idx[0]) if size is None else idx


def unit_sphere_direction(d, rng=None, size=None):
    """Uniformly random unit vector(s) in R^d (normalized Gaussians)."""
    d = int(d)
    if d < 1:
        raise ParameterError(f"dimension must be >= 1, got {d}")
    rng = _resolve(rng)
    m = 1 if size is None else int(size)
    g = np.asarray(rng.standard_normal((m, d)))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms == 0.0):
        zero = norms == 0.0
        g[zero] = rng.standard_normal((int(zero.sum()), d))
        norms = np.linalg.norm(g, axis=1)
    v = g / norms[:, None]
    return v[0] if size is None else v


def gaussian_vector(mean, covariance=None, rng=None, size=None):
    """Draw from N(mean, covariance).

    ``covariance`` may be ``None`` (identity), a scalar (isotropic), a 1-D
    array (diagonal) or a full PSD matrix.
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    d = mean.shape[0]
    rng = _resolve(rng)
    m = 1 if size is None else int(size)
    z = np.asarray(rng.standard_normal((m, d)))
    if covariance is None:
        out = z
    else:
        cov = np.asarray(covariance, dtype=float)
        if cov.ndim == 0:
            if cov < 0:
                raise ParameterError("variance must be nonnegative")
            out = z * math.sqrt(float(cov))
        elif cov.ndim == 1:
            if cov.shape[0] != d:
                raise ParameterError("diagonal covariance has wrong length")
            if np.any(cov < 0):
                raise ParameterError("diagonal covariance must be nonnegative")
            out = z * np.sqrt(cov)
        else:
            if cov.shape != (d, d):
                raise ParameterError(f"covariance must be {d}x{d}, got {cov.shape}")
            if not np.allclose(cov, cov.T, atol=1e-12 * max(1.0, np.abs(cov).max())):
                raise ParameterError("covariance must be symmetric")
            w, q = np.linalg.eigh(cov)
            if w.min() < -1e-10 * max(1.0, abs(w.max())):
                raise ParameterError("covariance must be positive semidefinite")
            root = q * np.sqrt(np.clip(w, 0.0, None))
            out = z @ root.T
    out = out + mean
    return out[0] if size is None else out
