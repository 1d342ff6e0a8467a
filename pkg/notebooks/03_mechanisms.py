# %% [markdown]
# # Private means: BoxEM, REM and the Gaussian baseline
#
# BoxEM samples from the exponential mechanism over depth inside a box and
# is pure DP. REM restricts to deep levels and guards that restriction with
# a propose-test-release check, so it can return FAIL.

# %%
import numpy as np

from tukeydp import RandomSource, boxem_estimate, gaussian_mechanism, rem_estimate

rng = RandomSource(2)
mu = np.array([2.0, -1.0])
x = mu + np.asarray(rng.standard_normal((1000, 2)))
print("empirical mean", x.mean(0).round(4))

# %%
box = boxem_estimate(x, eps=1.0, R=10.0, depth="random", k=30, rng=rng)
print("BoxEM", box.estimate.round(4), "level", box.level)

rem = rem_estimate(x, eps=1.0, delta=1e-6, depth="random", k=30, rng=rng)
print("REM", rem.outcome, rem.estimate, "h_tilde", rem.h_tilde, "level", rem.level)

gauss = gaussian_mechanism(x, eps=1.0, delta=1e-6, R=10.0, rng=rng)
print("Gaussian", gauss.round(4))

# %% [markdown]
# A result serializes to one JSON object, which is what the CLI prints.

# %%
print(rem.to_json()[:200], "...")

# %% [markdown]
# With ten points split between two far clusters the distance to unsafety
# is -1 and the test fails almost surely.

# %%
bad = np.r_[np.zeros((5, 2)), np.full((5, 2), 100.0)] + 1e-3 * np.asarray(rng.standard_normal((10, 2)))
print([rem_estimate(bad, 1.0, 1e-6, rng=rng).outcome for _ in range(5)])
