# %% [markdown]
# # Experiment harness
#
# `run_experiment` draws fresh data per trial, runs a mechanism and
# aggregates the errors. Trials share data across mechanisms for a given
# seed, so comparisons are paired.

# %%
import io

from tukeydp.presets import preset_points, run_preset
from tukeydp.simulate import ExperimentConfig, report_csv, run_experiment

for mech in ("boxem", "gauss"):
    rep = run_experiment(ExperimentConfig(n=200, d=2, mechanism=mech, trials=5, seed=3))
    a = rep.aggregate
    print(f"{mech:>6}: privacy {a['privacy_error']['mean']:.3f} +/- {a['privacy_error']['ci95']:.3f}"
          f"  sampling {a['sampling_error']['mean']:.3f}")

# %% [markdown]
# Contamination replaces a fraction of rows by a tight cluster at `s * 1`.
# Errors are then measured against the clean mean.

# %%
for alpha in (0.0, 0.1, 0.2):
    cfg = ExperimentConfig(n=300, d=2, mechanism="boxem", alpha=alpha, mean_radius=0.0, trials=3, seed=4)
    print(alpha, round(run_experiment(cfg).aggregate["error"]["mean"], 3))

# %% [markdown]
# Presets bundle the sweeps; each writes one CSV. Here a short univariate run.

# %%
print(len(preset_points("fig5")), "points in fig5")
buf = io.StringIO()
run_preset("univariate", buf, trials=50, seed=5)
print("\n".join(buf.getvalue().splitlines()[:3]))
