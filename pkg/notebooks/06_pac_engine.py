# %% [markdown]
# # Monte Carlo volumes in higher dimension
#
# Exact vertex enumeration stops being practical past a few dimensions. The
# pac engine chains volume ratios between consecutive depth levels using
# hit-and-run samples, starting from a known base volume.

# %%
import math

import numpy as np

from tukeydp import RandomSource, random_directions
from tukeydp.geometry import build_family, exact_family_volumes, nested_volume_estimates

rng = RandomSource(6)
x = np.asarray(rng.standard_normal((100, 2)))
fam = build_family(x, random_directions(30, 2, rng), 1)
exact = {l: e.log_volume for l, e in exact_family_volumes(fam).items()}
est = nested_volume_estimates(fam, exact[1], 10_000, steps=80, rng=rng)
errs = [abs(math.exp(est[l].log_volume - exact[l]) - 1) for l in exact if math.isfinite(exact[l])]
print(f"max relative error over {len(errs)} levels: {max(errs):.3f}")

# %% [markdown]
# A single d=10 BoxEM run with the pac engine. The walk budget is small,
# so this is a demonstration, not a privacy guarantee (the result is
# flagged as such).

# %%
from tukeydp import boxem_estimate

d = 10
mu = 3 * np.ones(d) / math.sqrt(d)
x10 = mu + np.asarray(rng.standard_normal((750, d)))
res = boxem_estimate(x10, 1.0, 10.0, depth="random", k=30, engine="pac", rng=rng,
                     samples_per_level=2000, steps=100)
print("privacy error", np.linalg.norm(res.estimate - x10.mean(0)).round(3),
      "sampling error", np.linalg.norm(x10.mean(0) - mu).round(3), res.flags)
