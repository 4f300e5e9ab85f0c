"""Bethe bounds, phase thresholds, small-n oracles and AMP for symmetric
rank-one matrix estimation with finite-support priors."""

__version__ = "0.1.0"

from .amp import AmpState, SeTrace, amp_run, state_evolution_run
from .bounds import (
    BoundResult,
    ModelPoint,
    evaluate_point,
    i_bethe,
    i_bethe_prime,
    i_lower,
    i_lower_prime,
    mi_from_free_energy,
    minimize_bound,
    state_evolution_step,
)
from .channel import (
    BernoulliLinearChannel,
    Channel,
    CustomChannel,
    GaussianChannel,
    effective_delta,
    sample_observation,
    score_at_zero,
)
from .errors import *  # noqa: F401,F403
from .oracle import (
    Instance,
    OracleEstimate,
    generate_instance,
    log_partition,
    mi_immse,
    mi_monte_carlo,
    nishimori_check,
    universality_gap,
)
from .phase import (
    PhaseDiagram,
    ThresholdSet,
    delta_algo,
    figure_curve,
    find_delta_detect,
    find_delta_match,
    find_rho_star,
    phase_diagram,
    row_tolerance,
    threshold_set,
)
from .prior import Prior, make_sparse_rademacher
from .scalar import denoiser, gauss_expect, gauss_hermite, j_func, posterior_variance
