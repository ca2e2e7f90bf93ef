"""Simulation and limit-law toolkit for a 3-period three-state quantum walk on the line."""

__version__ = "0.1.0"

from .limit import LimitDensityModel, approximate_prob, density_f, limit_density, nu_weight, support_intervals
from .measurement import distribution, gap_mass, moment
from .spectral import delocalization_rank_check, delta_mass, group_velocity, moment_limit
from .walk import (
    GROVER_THETA,
    CoinParameters,
    InitialState,
    Schedule,
    WalkState,
    build_coin,
    delocalized_equivalent_initial_state,
    evolve,
    initial_walk_state,
    step,
)

__all__ = [
    "GROVER_THETA",
    "CoinParameters",
    "InitialState",
    "LimitDensityModel",
    "Schedule",
    "WalkState",
    "approximate_prob",
    "build_coin",
    "delocalization_rank_check",
    "delocalized_equivalent_initial_state",
    "delta_mass",
    "density_f",
    "distribution",
    "evolve",
    "gap_mass",
    "group_velocity",
    "initial_walk_state",
    "limit_density",
    "moment",
    "moment_limit",
    "nu_weight",
    "step",
    "support_intervals",
]
