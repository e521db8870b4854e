"""Meta-learning multi-objective TPE with a similarity-based task kernel."""
from .benchmarks import (EllipsoidTask, TabularBenchmark, load_tabular, make_metadata,
                         write_tabular)
from .kde import KDE, BandwidthRule, select_bandwidths
from .optimizer import MOTPE, MetaLearnTPE, OptimizerConfig, TaskDataset
from .ranking import (attainment_surface_50, crowding_distance, nondomination_rank,
                      normalized_hv, split_observations)
from .similarity import (compute_task_kernel, gamma_set_similarity, hpi_scores,
                         select_dimensions, task_kernel, tv_distance)
from .space import (Categorical, Continuous, DomainError, Observation, Ordinal, SearchSpace,
                    sample_uniform)

__version__ = "0.1.0"
