"""Fringe-subtree counts in uniformly random plane trees with given vertex
degrees: exact moments, brute-force oracles, samplers, limit predictions and
a reproducible Monte Carlo harness."""
from ._accel import BACKEND
from .approx import (
    cai_devroye_bound,
    classify_regime,
    lindeberg_diagnostic,
    llt_prediction,
    normal_density_cdf,
    periodic_lambda,
    periodic_lambda_parity,
    poisson_pmf,
    size_expectation_asymptotic,
    statistic_tv_bound,
    stein_delta,
    ts_lambda,
    tv_distance,
)
from .errors import FringeError
from .exactstats import (
    ExactScalar,
    MomentReport,
    degree_moments,
    expected_count_size,
    expected_count_tree,
    expected_count_tree_upper,
    factorial_moment_size,
    factorial_moment_statistic,
    factorial_moment_tree,
    pi_p_statistic,
    pi_p_tree,
    variance_from_factorial,
    variance_relation_statistic,
)
from .oracle import (
    enumerate_trees,
    exact_count_distribution,
    joint_block_probability,
    swor_sum_pmf,
)
from .samplers import (
    CoupledPair,
    RandomStream,
    exchangeable_pair_step,
    sample_conditioned_gw,
    sample_swor_sum,
    sample_uniform_tree,
    stein_coupled_pair,
)
from .treecore import (
    DegreeDistribution,
    DegreeStatistic,
    PlaneTree,
    count_trees,
    cycle_rotate,
    degree_sequence_of_tree,
    empirical_distribution,
    fringe_count_size,
    fringe_count_statistic,
    fringe_count_tree,
    fringe_decomposition,
    is_valid_degree_sequence,
    span_of,
    tree_from_degree_sequence,
    validate_degree_statistic,
)

__version__ = "0.1.0"
