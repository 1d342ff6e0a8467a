"""Differentially private mean estimation with Tukey depth."""

__version__ = "0.1.0"

from .depth import (DirectionSet, axis_aligned_directions, exact_direction_candidates,
                    halfspace_count, make_directions, random_directions, tukey_depth)
from .mechanisms import (MechanismResult, approx_privacy_accounting, boxem_estimate,
                         gaussian_mechanism, quantile_em_univariate, rem_estimate,
                         split_privacy_budget)
from .randcore import RandomSource

__all__ = [
    "DirectionSet", "MechanismResult", "RandomSource", "approx_privacy_accounting",
    "axis_aligned_directions", "boxem_estimate", "exact_direction_candidates", "gaussian_mechanism",
    "halfspace_count", "make_directions", "quantile_em_univariate", "random_directions",
    "rem_estimate", "split_privacy_budget", "tukey_depth",
]
