# %% [markdown]
# How similar are two tasks?  Compare where their best 10% of observations
# live.  For f1 = |x - 0.3| and f2 = |x - 0.35| on [0, 1] the top decile
# regions are [0.25, 0.35] and [0.30, 0.40], whose intersection over union is
# 0.05 / 0.15 = 1/3.

# %%
import numpy as np

from metatpe.ranking import split_indices
from metatpe.similarity import compute_task_kernel
from metatpe.space import Continuous, SearchSpace

line = SearchSpace((Continuous("x", 0, 1),))
rng = np.random.default_rng(0)


def top_decile(center, n=10_000):
    u = rng.random((n, 1))
    return u[split_indices(np.abs(u[:, 0] - center), 0.1)[0]]


k = compute_task_kernel([top_decile(0.3), top_decile(0.35)], line, gamma=0.1, eta=2.5,
                        n_mc=1000, rng=np.random.default_rng(1))
print("similarity estimate:", round(float(k.similarities[0]), 3), "(exact 1/3)")
print("target kernel row:", np.round(k.target_row, 3))

# %% [markdown]
# Dissimilar tasks get no weight at all.

# %%
k = compute_task_kernel([top_decile(0.1), top_decile(0.8)], line, 0.1, 2.5, 1000,
                        np.random.default_rng(2))
print("disjoint similarity:", round(float(k.similarities[0]), 4), "row", np.round(k.target_row, 3))

# %% [markdown]
# A dimension that never matters is ranked last by the importance scores, so
# it barely moves the estimate.

# %%
plane = SearchSpace((Continuous("x", 0, 1), Continuous("noise", 0, 1)))
dl = []
for center in (0.3, 0.35):
    u = rng.random((10_000, 2))
    dl.append(u[split_indices(np.abs(u[:, 0] - center), 0.1)[0]])
k = compute_task_kernel(dl, plane, 0.1, 2.5, 1000, np.random.default_rng(3))
print("importance per dim:", k.hpi.averaged)
print("similarity with the extra dim:", round(float(k.similarities[0]), 3))

# %% [markdown]
# With only two good observations in the target no dimension is selected
# (floor(log_2.5 2) = 0), every task looks alike and the weights are uniform.

# %%
k = compute_task_kernel([top_decile(0.3, n=20), top_decile(0.9), top_decile(0.5)], line,
                        0.1, 2.5, 1000, np.random.default_rng(4))
print("dims:", k.dims, "row:", np.round(k.target_row, 3))
