"""Potts model sampling and maximum pseudo-likelihood inference."""

from potts_infer.coupling import (
    CouplingMatrix,
    CouplingStats,
    circulant,
    complete_bipartite,
    curie_weiss,
    disjoint_cliques,
    erdos_renyi,
    from_dense,
    load_coupling,
    save_coupling,
    sbm,
    scaled_adjacency,
    stats,
)
from potts_infer.model import (
    LocalFieldTable,
    PottsParams,
    conditional_probs,
    cw_augmented_sample,
    exact_distribution,
    gibbs_sample,
    load_configurations,
    local_fields,
    log_unnormalized_density,
    save_configurations,
)
from potts_infer.pseudolik import (
    ExistenceReport,
    PseudoLikEval,
    evaluate,
    existence_report,
    t_stat,
    t_stat_alt,
    u_stat,
)
from potts_infer.mple import FitOptions, MplFit, fit_beta, fit_field, fit_joint
from potts_infer.meanfield import (
    MeanFieldSolution,
    beta_critical,
    h_value,
    inestimability_line,
    maximize_h,
    tangent_hessian_negdef,
)

__all__ = [
    "CouplingMatrix",
    "CouplingStats",
    "scaled_adjacency",
    "curie_weiss",
    "erdos_renyi",
    "sbm",
    "disjoint_cliques",
    "complete_bipartite",
    "circulant",
    "from_dense",
    "stats",
    "save_coupling",
    "load_coupling",
    "PottsParams",
    "LocalFieldTable",
    "local_fields",
    "conditional_probs",
    "log_unnormalized_density",
    "exact_distribution",
    "gibbs_sample",
    "cw_augmented_sample",
    "save_configurations",
    "load_configurations",
    "PseudoLikEval",
    "ExistenceReport",
    "evaluate",
    "t_stat",
    "t_stat_alt",
    "u_stat",
    "existence_report",
    "MplFit",
    "FitOptions",
    "fit_joint",
    "fit_beta",
    "fit_field",
    "MeanFieldSolution",
    "h_value",
    "maximize_h",
    "tangent_hessian_negdef",
    "beta_critical",
    "inestimability_line",
]
