"""Ising models at high temperature: exact small-model oracles, Glauber
dynamics with coupling diagnostics, deviation bounds for multilinear
statistics, pseudo-likelihood fitting, and an MCMC goodness-of-fit
pipeline."""

from .model import (
    BRUTE_FORCE_CAP,
    DobrushinReport,
    ExactDistribution,
    IsingModel,
    conditional_plus_prob,
    dobrushin_slack,
    enumerate_configs,
    exact_expectation,
    exact_pmf,
    log_weight,
    validate_config,
)
from .dynamics import (
    ChainEnsemble,
    MixingSchedule,
    StepRecord,
    as_generator,
    contraction_diagnostic,
    coupled_step,
    glauber_step,
    hamming,
    hamming_trace,
    mixing_schedule,
    random_config,
    run_chain,
    run_coupled,
    sample_states,
    transition_matrix,
)
from .stats import (
    EmpiricalTail,
    MultilinearFn,
    TailBound,
    TailBoundQuery,
    all_pairs_fn,
    bilinear_tail_bound,
    binomial_stderr,
    centered_bilinear_eval,
    distance_fn,
    distance_pairs,
    distinct_ordered_sum,
    empirical_tail,
    empty_graph_lower_bound,
    graph_distance_statistic,
    marginal_sum_bound,
    marginal_sum_exact,
    multilinear_tail_bound,
    two_sample_bilinear_eval,
)
from .estimation import (
    MpleResult,
    mple_fit,
    mple_fit_zero_field,
    neighbor_sums,
    pseudo_likelihood_gradient,
    pseudo_likelihood_hessian,
    pseudo_log_likelihood,
)
from .gof import (
    GRID_CRITICAL_THETA,
    DepartureSpec,
    PowerPoint,
    TestReport,
    generate_departure,
    null_distribution,
    p_value,
    power_curve,
    run_test,
)
from .io import (
    BipartiteDataset,
    ItemIndicator,
    item_vector,
    load_bipartite,
    load_coefficients,
    load_graph,
    load_observation,
    save_configs,
    save_graph,
)

__version__ = "0.1.0"
