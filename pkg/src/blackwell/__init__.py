"""Blackwell, large-sample and Rényi comparisons of binary-state experiments."""

from .blackwell_order import (
    BlackwellResult,
    PiecewiseExpCurve,
    PiecewiseLinearUtility,
    Verdict,
    blackwell_compare,
    blackwell_dominates,
    expected_indirect_utility,
    fosd_perfected,
    matching_utility,
    mps_check,
    perfected_cdf,
    threshold_utility,
    verify_garbling,
)
from .config import Config
from .divergence import DivergenceSpec, check_additivity, check_dpi, divergence_eval, push_forward
from .errors import *  # noqa: F403
from .experiment import (
    AtomicDistribution,
    FiniteExperiment,
    PosteriorDistribution,
    convolution_power,
    garble,
    is_generic_pair,
    llr_distribution,
    make_experiment,
    make_garbling,
    mixture,
    posterior_distribution,
    power,
    power_llr,
    product,
)
from .fixtures import Fixture, load_fixture
from .large_deviations import cgf, chernoff_bound, eta_search, exact_tail, fenchel, ld_lower_bound, sample_bound
from .large_sample import catalyst, dominance_vector, large_sample_verdict, ratio_search
from .majorization import (
    MultiStateExperiment,
    jensen_check,
    majorizes,
    multistate_mgf,
    multistate_necessary,
    product_majorizes,
    renyi_entropy,
    torgersen_experiment,
    v_convexity,
)
from .renyi import (
    DominatesOnGrid,
    Example1Experiment,
    FailsAt,
    Inconclusive,
    dominance_ratio,
    renyi_divergence,
    renyi_order_check,
    renyi_profile,
)

__version__ = "0.1.0"
