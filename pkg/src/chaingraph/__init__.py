"""Structure learning for Gaussian chain graphs.

Estimates the undirected and directed structure of a chain graph from
i.i.d. samples by decomposing the precision matrix into a sparse part
plus a low-rank part, ordering the resulting chain components, and
recovering directed coefficients by truncated blockwise regression.
"""

from .diagnostics import (IncoherenceReport, TangentBases,
                          check_distinct_eigenvalues, check_incoherence,
                          check_transversality, fisher_operator, tangent_bases)
from .estimator import ChainGraphLearner
from .experiment import ExperimentConfig, run_experiment, run_replication
from .metrics import (EdgeMetrics, confusion_directed, confusion_undirected,
                      edge_metrics, mcc, shd)
from .model import (ChainGraph, PopulationMoments, SemParams,
                    chain_components, covariance_of, directed_support,
                    is_cg_feasible, low_rank_part,
                    population_conditional_cov, population_order_gap,
                    precision_of, undirected_support)
from .recovery import (OrderedComponents, RecoveryConfig, d_hat,
                       estimate_b_reg, finalize_b, learn_chain_graph,
                       order_components, truncate_svd)
from .simulate import (GenConfig, gen_example1, gen_example2, generate,
                       sample_data)
from .solver import (OmegaStepResult, PrecisionDecomposition, SolverConfig,
                     fit_sparse_lowrank, matrix_sqrt_spd, objective_value,
                     omega_step, project_psd_floor, soft_threshold_offdiag,
                     svt, theta_step)

__version__ = "0.1.0"

__all__ = [
    "ChainGraph", "ChainGraphLearner", "EdgeMetrics", "ExperimentConfig",
    "GenConfig", "IncoherenceReport", "OmegaStepResult", "OrderedComponents",
    "PopulationMoments", "PrecisionDecomposition", "RecoveryConfig",
    "SemParams", "SolverConfig", "TangentBases", "chain_components",
    "check_distinct_eigenvalues", "check_incoherence", "check_transversality",
    "confusion_directed", "confusion_undirected", "covariance_of", "d_hat",
    "directed_support", "edge_metrics", "estimate_b_reg", "finalize_b",
    "fisher_operator", "fit_sparse_lowrank", "gen_example1", "gen_example2",
    "generate", "is_cg_feasible", "learn_chain_graph", "low_rank_part",
    "matrix_sqrt_spd", "mcc", "objective_value", "omega_step",
    "order_components", "population_conditional_cov", "population_order_gap",
    "precision_of", "project_psd_floor", "run_experiment", "run_replication",
    "sample_data", "shd", "soft_threshold_offdiag", "svt", "tangent_bases",
    "theta_step", "truncate_svd", "undirected_support",
]
