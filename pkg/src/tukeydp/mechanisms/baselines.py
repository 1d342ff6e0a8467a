"""Clip-and-noise baselines."""

import math

import numpy as np

from ..depth import as_dataset
from ..randcore import ParameterError, _resolve


def clip_to_ball(x, R):
    """Project each row of ``x`` onto the l2 ball of radius ``R``."""
    x = as_dataset(x)
    norms = np.linalg.norm(x, axis=1)
    factor = np.ones_like(norms)
    far = norms > R
    factor[far] = R / norms[far]
    return x * factor[:, None]


def gaussian_sigma(n, eps, delta, R):
    """Noise scale for the clipped mean: sensitivity ``2R/n`` under swaps."""
    return (2.0 * R / n) * math.sqrt(2.0 * math.log(1.25 / delta)) / eps


def gaussian_mechanism(x, eps, delta, R, rng=None):
    """Clipped empirical mean plus spherical Gaussian noise.

    Uses the classical calibration, which is stated for ``eps <= 1``.
    """
    if not 0 < eps <= 1:
        raise ParameterError(f"the classical Gaussian calibration needs 0 < eps <= 1, got {eps}")
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    if not R > 0:
        raise ParameterError(f"clipping radius must be positive, got {R}")
    rng = _resolve(rng)
    x = as_dataset(x)
    n, d = x.shape
    mean = clip_to_ball(x, R).mean(axis=0)
    sigma = gaussian_sigma(n, eps, delta, R)
    return mean + sigma * np.asarray(rng.standard_normal(d))
