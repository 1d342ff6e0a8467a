# %% [markdown]
# # Tukey depth under three sets of directions
#
# Depth counts the data points on the far side of a hyperplane through `y`,
# minimized over directions. Exact candidates recover the classical value;
# random and axis-aligned sets give upper bounds that are cheaper to build.

# %%
import numpy as np

from tukeydp import (RandomSource, axis_aligned_directions, exact_direction_candidates,
                     random_directions, tukey_depth)

rng = RandomSource(0)
x = np.asarray(rng.standard_normal((60, 2)))

exact = exact_direction_candidates(x)
rand = random_directions(30, 2, rng)
axis = axis_aligned_directions(2)
print(len(exact), "exact candidates,", len(rand), "random,", len(axis), "axis-aligned")

# %% [markdown]
# Depth of a few points under each set. The centre is deep, a far point has
# depth zero, and the cheap sets never undercut the exact value.

# %%
probe = np.array([[0.0, 0.0], [1.0, 1.0], [4.0, 0.0]])
for name, dirs in (("exact", exact), ("random", rand), ("axis", axis)):
    print(f"{name:>6}", tukey_depth(x, probe, dirs))

# %% [markdown]
# On a grid, the random-direction depth is pointwise at least the exact one.

# %%
g = np.stack(np.meshgrid(np.linspace(-3, 3, 41), np.linspace(-3, 3, 41)), -1).reshape(-1, 2)
gap = tukey_depth(x, g, rand) - tukey_depth(x, g, exact)
print("min gap", gap.min(), "mean gap", gap.mean().round(3))
