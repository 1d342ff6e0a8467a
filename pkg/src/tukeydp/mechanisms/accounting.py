"""Privacy budget splits and the composition arithmetic for approximate volumes."""

from dataclasses import asdict, dataclass
import math

from ..randcore import ParameterError

MODES = ("exact", "approx")


@dataclass(frozen=True)
class PrivacyParams:
    """Budget split between the PTR test and the restricted mechanism.

    ``eta``, ``beta`` (volume oracle) and ``tau``, ``zeta`` (sampler) are set
    only in approx mode.
    """

    eps: float
    delta: float
    mode: str
    eps_p: float
    eps_e: float
    delta_p: float
    delta_e: float
    eta: float = None
    beta: float = None
    tau: float = None
    zeta: float = None

    @property
    def log_eta_ratio(self):
        """``log((1 + eta) / (1 - eta))``, zero in exact mode."""
        if not self.eta:
            return 0.0
        return math.log1p(self.eta) - math.log1p(-self.eta)

    def to_dict(self):
        return asdict(self)


def _check_eps_delta(eps, delta):
    if not (eps > 0 and math.isfinite(eps)):
        raise ParameterError(f"eps must be positive and finite, got {eps}")
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")


def split_privacy_budget(eps, delta, mode="exact"):
    """Per-component parameters whose composition is ``(eps, delta)``-DP."""
    eps, delta = float(eps), float(delta)
    _check_eps_delta(eps, delta)
    if mode == "exact":
        eps_p = eps / 4
        growth = math.exp(2 * eps_p)
        delta_e = delta / growth
        # round down so that growth * delta_e never exceeds delta in floating point
        while growth * delta_e > delta:
            delta_e = math.nextafter(delta_e, 0.0)
        return PrivacyParams(eps, delta, mode, eps_p, eps / 2, delta, delta_e)
    if mode == "approx":
        a = math.exp(eps / 20)
        eta = (a - 1) / (a + 1)
        beta = min(0.25, delta / (8 * (2 * math.exp(eps) + 1)))
        tau = delta / (4 * math.exp(11 * eps / 20) * (1 + math.exp(eps / 2)))
        return PrivacyParams(
            eps, delta, mode,
            eps_p=eps / 6,
            eps_e=2 * eps / 5,
            delta_p=delta / 2,
            delta_e=delta / (4 * math.exp(11 * eps / 20)),
            eta=eta, beta=beta, tau=tau, zeta=beta,
        )
    raise ParameterError(f"unknown privacy mode {mode!r}; expected one of {MODES}")


def _eta_log_ratio(eta):
    if not 0 <= eta < 1:
        raise ParameterError(f"eta must lie in [0, 1), got {eta}")
    return math.log1p(eta) - math.log1p(-eta)


def sensitivity_bound_approx(eps_e, eta):
    """Sensitivity of the distance-to-unsafety proxy under eta-accurate volumes."""
    if not eps_e > 0:
        raise ParameterError(f"eps_e must be positive, got {eps_e}")
    return 2.0 * (4.0 / eps_e * _eta_log_ratio(eta) + 1.0)


def _parts(eps_p, eps_e, delta_p, delta_e, eta, tau):
    L = _eta_log_ratio(eta)
    eps_test = 8 * eps_p / eps_e * L + 2 * eps_p
    eps_mech = eps_e + 2 * L
    eps_total = eps_test + eps_mech
    inner = (1 + eta) / (1 - eta) * delta_e + (1 + math.exp(eps_mech)) * tau
    delta_cond = max(delta_p, math.exp(eps_test) * inner)
    return eps_total, delta_cond


def approx_privacy_accounting(eps_p, eps_e, delta_p, delta_e, eta=0.0, tau=0.0, beta=0.0, zeta=0.0,
                              form="conditioning"):
    """Overall ``(eps, delta)`` of REM run with approximate volumes and sampling.

    The guarantee conditioned on every oracle call succeeding is lifted by
    ``delta + p_fail (e^eps / (1 - p_fail) + 1)`` with ``p_fail = 2(beta + zeta)``
    (``form="conditioning"``).  ``form="closed"`` instead uses the coarser
    ``2(2 e^eps + 1)(beta + zeta)`` term, which assumes ``p_fail <= 1/2``.
    """
    vals = dict(eps_p=eps_p, eps_e=eps_e, delta_p=delta_p, delta_e=delta_e,
                eta=eta, tau=tau, beta=beta, zeta=zeta)
    for name, v in vals.items():
        if not (v >= 0 and math.isfinite(v)):
            raise ParameterError(f"{name} must be finite and nonnegative, got {v}")
    if not eps_e > 0:
        raise ParameterError("eps_e must be positive")
    p_fail = 2 * (beta + zeta)
    if not p_fail < 0.5:
        raise ParameterError(f"2(beta + zeta) must be below 1/2, got {p_fail}")
    eps_total, delta_cond = _parts(eps_p, eps_e, delta_p, delta_e, eta, tau)
    if form == "conditioning":
        extra = p_fail * (math.exp(eps_total) / (1 - p_fail) + 1) if p_fail else 0.0
    elif form == "closed":
        extra = 2 * (2 * math.exp(eps_total) + 1) * (beta + zeta)
    else:
        raise ParameterError(f"unknown accounting form {form!r}")
    return eps_total, delta_cond + extra


def account(params, form="conditioning"):
    """Total guarantee implied by a :class:`PrivacyParams` split."""
    return approx_privacy_accounting(
        params.eps_p, params.eps_e, params.delta_p, params.delta_e,
        eta=params.eta or 0.0, tau=params.tau or 0.0,
        beta=params.beta or 0.0, zeta=params.zeta or 0.0, form=form,
    )
