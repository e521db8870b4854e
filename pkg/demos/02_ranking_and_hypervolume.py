# %% [markdown]
# Multi-objective bookkeeping: nondomination ranks, crowding distance, the
# top/bottom split used by the optimizer, normalized hypervolume and the 50%
# attainment surface.

# %%
import numpy as np

from metatpe.ranking import (attainment_surface_50, crowding_distance, hv_curve,
                             nondomination_rank, normalized_hv, split_indices)

rng = np.random.default_rng(1)
f = rng.random((12, 2))
ranks = nondomination_rank(f)
print("ranks:", ranks)
front = f[ranks == 0]
print("crowding of the first front:", np.round(crowding_distance(front), 3))

# %% [markdown]
# The split keeps ceil(gamma * n) observations: whole fronts first, then the
# most isolated points of the front that straddles the cut.

# %%
lower, upper = split_indices(f, gamma=0.25)
print("top group:", lower, "ranks", ranks[lower])

# %%
print("normalized HV of everything:", round(normalized_hv(f, [0, 0], [1, 1]), 4))
curve = hv_curve(f, [0, 0], [1, 1])
print("running HV:", np.round(curve, 3))

# %% [markdown]
# Three runs, and the surface reached by at least two of them.

# %%
runs = [rng.random((8, 2)) for _ in range(3)]
print(attainment_surface_50(runs))
