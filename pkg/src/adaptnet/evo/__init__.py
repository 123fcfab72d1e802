"""Two-strategy evolutionary game on graphs: payoffs, simulation, theory."""

from .payoff import UtilityMatrix2, pi_emse, step_size_bound, utility_from_pi
from .state import S_M, S_R, EvoState, PlacementError, evenly_spaced_placement, random_placement
from .montecarlo import FixationEstimate, fixation_probability, strategy_evolution_rule_compare
from .theory import (appendix_coeffs, ess_complete, ess_regular, fixation_kolmogorov,
                     replicator_trajectory, theorem1_closed_form, u_prime, xi_coeffs)
from .exact import exact_fixation

__all__ = [
    "UtilityMatrix2", "pi_emse", "step_size_bound", "utility_from_pi",
    "S_M", "S_R", "EvoState", "PlacementError", "evenly_spaced_placement", "random_placement",
    "FixationEstimate", "fixation_probability", "strategy_evolution_rule_compare",
    "appendix_coeffs", "ess_complete", "ess_regular", "fixation_kolmogorov",
    "replicator_trajectory", "theorem1_closed_form", "u_prime", "xi_coeffs", "exact_fixation",
]
