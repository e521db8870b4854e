# %% [markdown]
# Tabular benchmarks: a JSON file declares the space, objective directions
# and worst values, then lists one record per configuration.  Missing
# objectives of failed runs are padded with the declared worst value.
#
# The same pipeline is available from the shell:
#
#     metatpe run --benchmark tests/fixtures/nmt_target.json \
#         --meta tests/fixtures/nmt_meta_near.json --method metalearn-tpe \
#         --budget 50 --seed 0 --out run.jsonl
#     metatpe hv run.jsonl --benchmark tests/fixtures/nmt_target.json
#     metatpe eaf run.jsonl --benchmark tests/fixtures/nmt_target.json --format csv
#     metatpe similarity --benchmark tests/fixtures/nmt_target.json \
#         --meta tests/fixtures/nmt_meta_near.json --meta tests/fixtures/nmt_meta_far.json

# %%
import os

import numpy as np

from metatpe import OptimizerConfig, load_tabular
from metatpe.experiments import METHODS, build_metadata, run_method

here = os.path.dirname(os.path.abspath(__file__))
fixtures = os.path.join(here, os.pardir, "tests", "fixtures")
target = load_tabular(os.path.join(fixtures, "nmt_target.json"))
print(target.name, "-", len(target), "records over", target.space.names)
print("directions:", target.directions, "worst:", target.worst)

# %% [markdown]
# Both objectives are maximized, so internally they are negated.

# %%
config = next(iter(target.configs.values()))
print(config, "->", target.lookup(config), "internal")

# %%
meta_sources = [load_tabular(os.path.join(fixtures, f))
                for f in ("nmt_meta_near.json", "nmt_meta_far.json")]
meta = build_metadata(meta_sources, 100, seed=0, space=target.space)
for method in METHODS:
    recs = run_method(method, target, 40, OptimizerConfig(seed=0, n_mc=400), meta)
    hv = np.array([r.hv for r in recs])
    print(f"{method:>15}: HV@10 {hv[9]:.3f}  HV@40 {hv[-1]:.3f}")
