"""Equilibrium detectors, potential bookkeeping and social-cost checks."""

from .equilibria import (
    EquilibriumParams,
    classify_paths,
    is_approx_equilibrium,
    is_imitation_stable,
    is_nash,
    unsatisfied_fraction,
)
from .potential import (
    ConsistencyFault,
    PotentialDecomposition,
    decompose,
    edge_error_terms,
    error_terms,
    virtual_gain,
)
from .social import fractional_optimum, linear_slopes, social_cost, stable_cost_bounds_check

__all__ = [
    "ConsistencyFault",
    "EquilibriumParams",
    "PotentialDecomposition",
    "classify_paths",
    "decompose",
    "edge_error_terms",
    "error_terms",
    "fractional_optimum",
    "is_approx_equilibrium",
    "is_imitation_stable",
    "is_nash",
    "linear_slopes",
    "social_cost",
    "stable_cost_bounds_check",
    "unsatisfied_fraction",
    "virtual_gain",
]
