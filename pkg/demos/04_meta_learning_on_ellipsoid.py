# %% [markdown]
# Meta-learning on the shifted ellipsoid f(x|c) = sum_d 5^(d-1) (x_d - c)^2.
# The target has c = 0; the meta-task is the same function shifted by c*.
# A meta-task with the same optimum helps early on.  The kernel weight of any
# meta-task ends up small once the target's good region is sharp; its ordering
# by c* only shows in medians over many seeds (acceptance test 1 runs 20).

# %%
import numpy as np

from metatpe import MOTPE, EllipsoidTask, MetaLearnTPE, OptimizerConfig, make_metadata

target = EllipsoidTask(0.0)
budget = 60
print(f"{'c*':>4} {'best@30':>10} {'best@60':>10} {'final weight':>13}")
for c_star in (0, 2, 4):
    meta = make_metadata(EllipsoidTask(float(c_star)), 100, seed=7)
    opt = MetaLearnTPE(target.space, [meta], OptimizerConfig(seed=0, n_mc=400))
    hist = opt.run(target, budget)
    y = np.minimum.accumulate([o.objectives[0] for o in hist])
    print(f"{c_star:>4} {y[29]:>10.2f} {y[-1]:>10.2f} {opt.kernel_history[-1][1]:>13.3g}")

# %% [markdown]
# Plain TPE from a uniform initial design, for reference.

# %%
hist = MOTPE(target.space, OptimizerConfig(seed=0)).run(target, budget)
y = np.minimum.accumulate([o.objectives[0] for o in hist])
print(f"TPE  {y[29]:>10.2f} {y[-1]:>10.2f}")

# %% [markdown]
# The kernel row is recomputed every iteration.  It starts near 1/2 (few good
# target points, no informative dimension) and decays as the target's good
# region becomes sharper than anything the meta data can offer.

# %%
meta = make_metadata(EllipsoidTask(0.0), 100, seed=7)
opt = MetaLearnTPE(target.space, [meta], OptimizerConfig(seed=0, n_mc=400))
opt.run(target, budget)
w = np.array(opt.kernel_history)[:, 1]
print("meta weight every 10 iterations:", np.round(w[::10], 4))
