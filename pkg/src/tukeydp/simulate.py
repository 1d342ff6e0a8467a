"""Synthetic experiments: data generation, contamination, error metrics, trials."""

import csv
from dataclasses import asdict, dataclass, field, replace
import io
import math
import time

import numpy as np

from . import __version__
from .depth import as_dataset
from .mechanisms import boxem_estimate, gaussian_mechanism, quantile_em_univariate, rem_estimate
from .mechanisms.result import ESTIMATE, MechanismResult
from .randcore import ParameterError, RandomSource, _resolve, gaussian_vector, unit_sphere_direction

MECHANISMS = ("boxem", "rem", "gauss", "quantile-em", "empirical")
OMIT_ABOVE = 3.0
CI_Z = 1.96


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    d: int
    mechanism: str = "boxem"
    eps: float = 1.0
    delta: float = 1e-6
    R: float = 10.0
    trials: int = 10
    depth: str = "exact"
    k: int = 30
    engine: str = "exact"
    alpha: float = 0.0
    scale: float = 5.0
    seed: int = None
    t: int = None
    samples_per_level: int = 10_000
    steps: int = None
    mean_radius: float = 3.0
    covariance: tuple = None  # diagonal entries; identity when None

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if not 0 <= self.alpha < 1:
            raise ParameterError(f"corruption fraction must lie in [0, 1), got {self.alpha}")
        if self.mechanism not in MECHANISMS:
            raise ParameterError(f"unknown mechanism {self.mechanism!r}; expected one of {MECHANISMS}")
        if self.n < 1 or self.d < 1:
            raise ParameterError("n and d must be positive")

    def with_(self, **kw):
        return replace(self, **kw)


def gen_gaussian_data(n, d, mean_radius=3.0, rng=None, covariance=None):
    """``n`` draws from ``N(mu, cov)`` with ``mu`` uniform on the sphere of radius ``mean_radius``."""
    if n < 1 or d < 1:
        raise ParameterError("n and d must be positive")
    rng = _resolve(rng)
    mu = mean_radius * unit_sphere_direction(d, rng) if mean_radius else np.zeros(d)
    x = gaussian_vector(mu, covariance, rng, size=n)
    return x, mu


def corrupt(x, alpha, scale, rng=None):
    """Replace ``floor(alpha n)`` random rows by draws from ``N(scale * 1, 0.1 I)``."""
    if not 0 <= alpha < 1:
        raise ParameterError(f"corruption fraction must lie in [0, 1), got {alpha}")
    x = as_dataset(x)
    n, d = x.shape
    m = int(math.floor(alpha * n))
    out = x.copy()
    if m == 0:
        return out
    rng = _resolve(rng)
    rows = rng.choice_without_replacement(n, m)
    out[rows] = gaussian_vector(np.full(d, float(scale)), 0.1, rng, size=m)
    return out


def mahalanobis_error(estimate, mu, sigma):
    """``|| sigma^{-1/2} (estimate - mu) ||_2``."""
    diff = np.atleast_1d(np.asarray(estimate, dtype=float) - np.asarray(mu, dtype=float))
    S = np.atleast_2d(np.asarray(sigma, dtype=float))
    if S.shape != (diff.size, diff.size):
        raise ParameterError("covariance shape does not match the estimate")
    w, q = np.linalg.eigh((S + S.T) / 2)
    if w.min() <= 1e-12 * max(1.0, abs(w.max())):
        raise ParameterError("covariance must be positive definite")
    z = q.T @ diff / np.sqrt(w)
    return float(np.linalg.norm(z))


def run_mechanism(cfg, x, rng):
    """Dispatch ``cfg.mechanism`` on ``x``; always returns a :class:`MechanismResult`."""
    m = cfg.mechanism
    if m == "boxem":
        return boxem_estimate(x, cfg.eps, cfg.R, depth=cfg.depth, k=cfg.k, engine=cfg.engine, rng=rng,
                              samples_per_level=cfg.samples_per_level, steps=cfg.steps)
    if m == "rem":
        return rem_estimate(x, cfg.eps, cfg.delta, t=cfg.t, depth=cfg.depth, k=cfg.k,
                            engine=cfg.engine, rng=rng, samples_per_level=cfg.samples_per_level,
                            steps=cfg.steps)
    if m == "gauss":
        y = gaussian_mechanism(x, cfg.eps, cfg.delta, cfg.R, rng)
        return MechanismResult(ESTIMATE, estimate=y, seed=rng.seed)
    if m == "quantile-em":
        y = quantile_em_univariate(x, cfg.eps, cfg.R, rng)
        return MechanismResult(ESTIMATE, estimate=[y], seed=rng.seed)
    if m == "empirical":
        return MechanismResult(ESTIMATE, estimate=np.mean(x, axis=0), seed=rng.seed)
    raise ParameterError(f"unknown mechanism {m!r}")


METRICS = ("sampling_error", "privacy_error", "error", "mahalanobis_sampling", "mahalanobis_privacy",
           "mahalanobis_error")


@dataclass
class TrialReport:
    """Per-trial rows and their aggregate.

    ``privacy_error`` is ``||mu_tilde - mu_hat||`` against the empirical mean
    of the data the mechanism saw; ``error`` is ``||mu_tilde - mu||`` against
    the clean mean, which is the figure of merit under contamination.
    """

    config: ExperimentConfig
    rows: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    dropped: bool = False
    omitted: bool = False
    note: str = ""

    @property
    def fails(self):
        return sum(1 for r in self.rows if r["fail"])

    def recompute(self):
        ok = [r for r in self.rows if not r["fail"] and not r.get("error_message")]
        agg = {}
        for key in METRICS:
            vals = np.array([r[key] for r in ok], dtype=float)
            if vals.size == 0:
                agg[key] = {"mean": math.nan, "ci95": math.nan, "rmse": math.nan}
                continue
            agg[key] = {
                "mean": float(vals.mean()),
                # 1.96 sigma / sqrt(trials), sigma the population spread of the trials
                "ci95": float(CI_Z * vals.std() / math.sqrt(self.config.trials)),
                "rmse": float(math.sqrt(np.mean(vals**2))),
            }
        self.aggregate = agg
        notes = []
        self.dropped = self.config.mechanism == "rem" and self.fails > 0
        if self.dropped:
            notes.append(f"dropped: REM FAIL in {self.fails}/{self.config.trials} trials")
        errs = [r for r in self.rows if r.get("error_message")]
        if errs:
            notes.append(f"{len(errs)} trial errors: {errs[0]['error_message']}")
        m = agg["privacy_error"]["mean"]
        self.omitted = not self.dropped and math.isfinite(m) and m > OMIT_ABOVE
        if self.omitted:
            notes.append(f"omitted: mean error {m:.3g} > {OMIT_ABOVE:g}")
        self.note = "; ".join(notes)
        return agg


def run_trial(cfg, trial, mechanism=None, with_time=False):
    root = RandomSource(cfg.seed) if cfg.seed is not None else RandomSource()
    data_rng, mech_rng = root.spawn(trial, 0), root.spawn(trial, 1)
    cov = None if cfg.covariance is None else np.asarray(cfg.covariance, dtype=float)
    x, mu = gen_gaussian_data(cfg.n, cfg.d, cfg.mean_radius, data_rng, covariance=cov)
    if cfg.alpha > 0:
        x = corrupt(x, cfg.alpha, cfg.scale, data_rng)
    sigma = np.eye(cfg.d) if cov is None else np.diag(cov)
    mu_hat = x.mean(axis=0)
    row = {"trial": trial, "fail": False, "error_message": "",
           "sampling_error": float(np.linalg.norm(mu_hat - mu)),
           "mahalanobis_sampling": mahalanobis_error(mu_hat, mu, sigma)}
    start = time.perf_counter()
    try:
        res = (mechanism or run_mechanism)(cfg, x, mech_rng)
    except Exception as exc:  # recorded per trial, not fatal to the sweep
        res = None
        row["error_message"] = f"{type(exc).__name__}: {exc}"
    row["wall_time"] = time.perf_counter() - start
    if res is None or res.failed:
        row["fail"] = res is not None
        for key in ("privacy_error", "error", "mahalanobis_privacy", "mahalanobis_error"):
            row[key] = math.nan
        row["level"] = None if res is None else res.level
        row["h_tilde"] = None if res is None else res.h_tilde
    else:
        est = res.estimate
        row.update({
            "privacy_error": float(np.linalg.norm(est - mu_hat)),
            "error": float(np.linalg.norm(est - mu)),
            "mahalanobis_privacy": mahalanobis_error(est, mu_hat, sigma),
            "mahalanobis_error": mahalanobis_error(est, mu, sigma),
            "level": res.level,
            "h_tilde": res.h_tilde,
        })
    if not with_time:
        row.pop("wall_time")
    return row


def run_experiment(config, mechanism=None, with_time=False):
    """Run ``config.trials`` trials and aggregate them.

    Trial ``i`` draws its data from the child stream ``(seed, i, 0)`` and the
    mechanism's randomness from ``(seed, i, 1)``, so the data are shared
    across mechanisms and sweep values and runs are reproducible under any
    trial order.  ``mechanism(cfg, x, rng)`` replaces the built-in dispatch.
    """
    report = TrialReport(config)
    for i in range(config.trials):
        report.rows.append(run_trial(config, i, mechanism, with_time))
    report.recompute()
    return report


CSV_FIELDS = ("tag", "x_name", "x", "mechanism", "depth", "k", "engine", "n", "d", "eps", "delta",
              "R", "alpha", "scale", "trial", "stat", "fail", "level", "h_tilde", "sampling_error",
              "privacy_error", "error", "mahalanobis_sampling", "mahalanobis_privacy", "mahalanobis_error",
              "wall_time", "note")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return f"{v:.10g}"
    return str(v)


def report_rows(report, x_name="", x=""):
    """CSV rows: one per trial, then ``AGG`` rows for mean, ci95 and rmse."""
    c = report.config
    base = {"x_name": x_name, "x": x, "mechanism": c.mechanism,
            "depth": c.depth if c.mechanism in ("boxem", "rem") else "",
            "k": c.k if c.mechanism in ("boxem", "rem") and c.depth == "random" else "",
            "engine": c.engine if c.mechanism in ("boxem", "rem") else "",
            "n": c.n, "d": c.d, "eps": c.eps, "delta": c.delta, "R": c.R, "alpha": c.alpha,
            "scale": c.scale}
    out = []
    for r in report.rows:
        row = dict(base, tag="TRIAL", **{k: r.get(k) for k in CSV_FIELDS if k in r})
        row["note"] = r.get("error_message", "")
        out.append(row)
    for stat in ("mean", "ci95", "rmse"):
        row = dict(base, tag="AGG", stat=stat, fail=report.fails, note=report.note)
        for key in METRICS:
            row[key] = report.aggregate[key][stat]
        out.append(row)
    return out


def write_csv(rows, fh, preset="custom"):
    fh.write(f"# tukey-dp v{__version__} preset={preset}\n")
    w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k)) for k in CSV_FIELDS})


def report_csv(report, preset="custom"):
    buf = io.StringIO()
    write_csv(report_rows(report), buf, preset)
    return buf.getvalue()


def config_dict(cfg):
    return asdict(cfg)
