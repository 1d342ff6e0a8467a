from .accounting import (PrivacyParams, account, approx_privacy_accounting,
                         sensitivity_bound_approx, split_privacy_budget)
from .baselines import clip_to_ball, gaussian_mechanism, gaussian_sigma
from .exponential import (approximate_distance_to_unsafety, boxem_estimate, level_log_weights,
                          ptr_check, ptr_threshold, quantile_em_univariate, rem_estimate)
from .result import FAIL, MechanismResult

__all__ = [
    "FAIL", "MechanismResult", "PrivacyParams", "account", "approx_privacy_accounting",
    "approximate_distance_to_unsafety", "boxem_estimate", "clip_to_ball", "gaussian_mechanism",
    "gaussian_sigma", "level_log_weights", "ptr_check", "ptr_threshold", "quantile_em_univariate",
    "rem_estimate", "sensitivity_bound_approx", "split_privacy_budget",
]
