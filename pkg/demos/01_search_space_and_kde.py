# %% [markdown]
# Search spaces and the Parzen estimators built on them.
#
# Every parameter maps into [0, 1] (categoricals keep their index), and the
# optimizer only ever models points in that unit representation.

# %%
import numpy as np

from metatpe import KDE, Categorical, Continuous, Ordinal, SearchSpace

space = SearchSpace((
    Continuous("lr", 1e-4, 1e-1, log_scale=True),
    Ordinal("layers", (1, 2, 4, 8)),
    Categorical("act", ("relu", "tanh", "gelu")),
))
config = {"lr": 1e-2, "layers": 4, "act": "tanh"}
u = space.to_unit(config)
print("unit coords:", u)                 # lr sits 2/3 of the way up in log space
print("back again:", space.from_unit(u))
print("grid size of the discrete part:", space["layers"].cardinality * space["act"].cardinality)

# %% [markdown]
# Ordinal coordinates snap to the nearest level, rounding halves up.

# %%
print(space.from_unit(np.array([0.5, 0.5, 0.0])))

# %% [markdown]
# A KDE over some good-looking points.  Continuous dims use a Gaussian
# truncated to the unit interval; categoricals use an Aitchison-Aitken kernel.

# %%
rng = np.random.default_rng(0)
good = space.sample_unit(rng, 15)
good[:, 0] = rng.normal(0.65, 0.05, 15).clip(0, 1)
kde = KDE(good, space)
print("bandwidths:", np.round(kde.bandwidths, 4))

xs = np.linspace(0, 1, 2001)
lr_marginal = kde.marginal_pdf(0, xs)
print("lr marginal integrates to", round(float(np.trapezoid(lr_marginal, xs)), 5))
print("act marginal:", [round(float(kde.marginal_pdf(2, k)), 3) for k in range(3)])

# %%
samples = kde.sample(5, rng)
for row in space.snap(samples):
    print(space.from_unit(row))
