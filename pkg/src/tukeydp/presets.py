"""Named experiment sweeps.

Each preset is a list of ``(x_name, x, ExperimentConfig)`` points.  The sweep
grids are our own choices; they are written into every CSV header so a run
records what it swept.
"""

from dataclasses import fields

from .depth import EXACT_DIM_CAP
from .randcore import ParameterError
from .simulate import ExperimentConfig, report_rows, run_experiment, write_csv

TUKEY = ("boxem", "rem")


def _fig3():
    pts = []
    for n in (50, 100, 200, 500, 1000):
        for mech in ("boxem", "rem", "gauss"):
            pts.append(("n", n, ExperimentConfig(n=n, d=2, mechanism=mech, trials=10)))
    return pts


def _fig4():
    pts = []
    for R in (10.0, 1e2, 1e4, 1e6, 1e8, 1e10):
        for mech in ("boxem", "rem", "gauss"):
            pts.append(("R", R, ExperimentConfig(n=1000, d=2, mechanism=mech, R=R, depth="random",
                                                 k=30, trials=10)))
    return pts


def _fig5():
    base = ExperimentConfig(n=200, d=2, mechanism="boxem", trials=200)
    pts = [("k", k, base.with_(depth="random", k=k)) for k in (1, 2, 4, 8, 16, 32, 64, 128, 256)]
    pts.append(("k", "", base.with_(depth="exact")))
    pts.append(("k", "", base.with_(depth="axis")))
    return pts


def _robust_rate():
    # clean component centred at the origin, outliers at s * 1
    return [("alpha", a, ExperimentConfig(n=500, d=2, mechanism=m, alpha=a, scale=5.0,
                                          mean_radius=0.0, trials=10))
            for a in (0.0, 0.05, 0.1, 0.2) for m in ("boxem", "rem", "gauss")]


def _robust_location():
    return [("scale", s, ExperimentConfig(n=500, d=2, mechanism=m, alpha=0.1, scale=s,
                                          mean_radius=0.0, trials=10))
            for s in (1.0, 2.0, 5.0, 10.0, 20.0) for m in ("boxem", "rem", "gauss")]


def _univariate():
    return [("n", n, ExperimentConfig(n=n, d=1, mechanism=m, R=5.0, mean_radius=0.0, trials=10_000))
            for n in (50, 100, 200, 400, 800, 1300, 2000, 5000, 10_000)
            for m in ("quantile-em", "gauss", "empirical")]


def _fig7():
    # hit-and-run budgets far below the heuristic default, as in a single
    # proof-of-concept run; override with --steps / --samples-per-level
    pts = []
    for n in (250, 500, 750, 1000):
        pts.append(("n", n, ExperimentConfig(n=n, d=10, mechanism="boxem", depth="random", k=30,
                                             engine="pac", trials=1, samples_per_level=2000,
                                             steps=100)))
        pts.append(("n", n, ExperimentConfig(n=n, d=10, mechanism="gauss", trials=1)))
    return pts


PRESETS = {
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "robust_rate": _robust_rate,
    "robust_location": _robust_location,
    "univariate": _univariate,
    "fig7": _fig7,
}

_CONFIG_FIELDS = {f.name for f in fields(ExperimentConfig)}


def preset_points(name, **overrides):
    """Expand preset ``name``, applying ``overrides`` (``None`` values ignored).

    Mechanism-specific knobs (depth, k, engine, t, steps, samples) only touch
    the Tukey mechanisms.  Raises :class:`ParameterError` on an unknown preset
    or a combination the exact engine cannot run.
    """
    if name not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    over = {k: v for k, v in overrides.items() if v is not None}
    bad = set(over) - _CONFIG_FIELDS
    if bad:
        raise ParameterError(f"unknown overrides {sorted(bad)}")
    tukey_only = {"depth", "k", "engine", "t", "steps", "samples_per_level"}
    pts = []
    for x_name, x, cfg in PRESETS[name]():
        kw = {k: v for k, v in over.items() if k not in tukey_only or cfg.mechanism in TUKEY}
        cfg = cfg.with_(**kw)
        if cfg.mechanism in TUKEY and cfg.depth == "exact" and cfg.d > EXACT_DIM_CAP:
            raise ParameterError(
                f"preset {name}: exact depth is capped at d <= {EXACT_DIM_CAP} (got d={cfg.d}); "
                "use --depth random or --depth axis")
        pts.append((x_name, x, cfg))
    return pts


def run_preset(name, fh, progress=None, with_time=False, **overrides):
    """Run every point of a preset and stream the CSV to ``fh``."""
    rows = []
    reports = []
    for x_name, x, cfg in preset_points(name, **overrides):
        rep = run_experiment(cfg, with_time=with_time)
        reports.append(rep)
        rows.extend(report_rows(rep, x_name, x))
        if progress:
            progress(x_name, x, rep)
    write_csv(rows, fh, name)
    return reports
