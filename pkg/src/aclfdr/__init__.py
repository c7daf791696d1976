"""Large-scale multiple testing under unknown dependence.

The package approximates per-site posterior signal probabilities from a
second-order expansion of the conditional likelihood in the signal
strength, runs step-up testing procedures on posteriors and p-values,
and ships a reproducible Monte Carlo harness that samples dependence
structures (transition matrices with prescribed stationary vector and
spectral lower bounds) to compare the procedures' false discovery
proportion and power.
"""

from .exceptions import (
    BudgetError,
    ConfigError,
    ConvergenceError,
    DegenerateDensityError,
    EstimationError,
    SamplingBudgetError,
)

__version__ = "0.1.0"

from . import backend
from .ensembles import (
    ConstrainedSample,
    ProbVector,
    SpectralSummary,
    TransitionMatrix,
    eigenmoduli,
    sample_constrained_transition,
    sample_dirichlet_transition,
    sample_stationary_vector,
    sinkhorn_balance,
    to_transition,
)
from .signal import (
    MomentSlices,
    ParentChainSpec,
    WindowedMoments,
    analytic_moments,
    as_binary_signal,
    estimate_moments,
    moment_vectors_at,
    project,
    simulate_chain,
)
from .likelihood import (
    GeneralMoments,
    NoiseModel,
    Observations,
    PosteriorVector,
    approx_logits,
    gaussian_noise,
    log_emission,
    log_mgf_expansion,
    logit_general,
    logit_localized,
    multiplicative_gamma_k,
    posteriors,
    site_derivatives,
)
from .oracle import (
    ExactPosterior,
    brute_force_posterior,
    forward_backward_posterior,
    iid_prior,
)
from .procedures import (
    ConfusionCounts,
    TestDecision,
    augmented_alpha,
    bayes_bh,
    bh,
    confusion,
    p_values_one_sided,
)
from .harness import (
    ExperimentResult,
    ProcedureSummary,
    ReplicationRecord,
    SimulationConfig,
    SummaryTable,
    chain_from_dict,
    density_grid,
    kde,
    load_chain_file,
    read_records_csv,
    run_experiment,
    silverman_bandwidth,
    summarize,
    write_density_csv,
    write_records_csv,
    write_summary_json,
)

__all__ = [
    "__version__",
    "backend",
    # errors
    "BudgetError",
    "ConfigError",
    "ConvergenceError",
    "DegenerateDensityError",
    "EstimationError",
    "SamplingBudgetError",
    # matrix ensembles
    "ProbVector",
    "TransitionMatrix",
    "SpectralSummary",
    "ConstrainedSample",
    "sample_stationary_vector",
    "sample_dirichlet_transition",
    "sinkhorn_balance",
    "to_transition",
    "eigenmoduli",
    "sample_constrained_transition",
    # signal
    "ParentChainSpec",
    "WindowedMoments",
    "MomentSlices",
    "as_binary_signal",
    "simulate_chain",
    "project",
    "estimate_moments",
    "moment_vectors_at",
    "analytic_moments",
    # likelihood
    "NoiseModel",
    "gaussian_noise",
    "Observations",
    "PosteriorVector",
    "GeneralMoments",
    "log_emission",
    "site_derivatives",
    "multiplicative_gamma_k",
    "log_mgf_expansion",
    "logit_general",
    "logit_localized",
    "approx_logits",
    "posteriors",
    # oracle
    "ExactPosterior",
    "iid_prior",
    "brute_force_posterior",
    "forward_backward_posterior",
    # procedures
    "TestDecision",
    "ConfusionCounts",
    "bayes_bh",
    "bh",
    "p_values_one_sided",
    "augmented_alpha",
    "confusion",
    # harness
    "SimulationConfig",
    "ReplicationRecord",
    "ProcedureSummary",
    "SummaryTable",
    "ExperimentResult",
    "run_experiment",
    "summarize",
    "kde",
    "silverman_bandwidth",
    "density_grid",
    "load_chain_file",
    "chain_from_dict",
    "read_records_csv",
    "write_records_csv",
    "write_summary_json",
    "write_density_csv",
]
