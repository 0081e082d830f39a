"""Trapping, normal forms and symbol orders near Kerr(-de Sitter) photon regions."""

from .errors import KerrTrapError
from .flow import Trajectory, integrate_hp, integrate_hphiu, travel_time_closed, travel_time_numeric
from .integrators import IntegratorSpec
from .normal_form import sp, verify_canonical
from .phase_space import PhasePoint, hamilton_vector, p_symbol, poisson_bracket
from .spacetime import BlackHoleParams, classify_subextremal, exterior
from .symbol_scaling import estimate_orders, verify_symbol_bound
from .trapping import (
    critical_radius,
    expansion_rate,
    nu_bounds,
    phi_hat_u,
    phi_s,
    phi_u,
    sample_neighborhood,
    sample_trapped_set,
)

__all__ = [
    "BlackHoleParams", "IntegratorSpec", "KerrTrapError", "PhasePoint", "Trajectory",
    "classify_subextremal", "critical_radius", "estimate_orders", "expansion_rate", "exterior",
    "hamilton_vector", "integrate_hp", "integrate_hphiu", "nu_bounds", "p_symbol",
    "phi_hat_u", "phi_s", "phi_u", "poisson_bracket", "sample_neighborhood", "sample_trapped_set",
    "sp", "travel_time_closed", "travel_time_numeric", "verify_canonical", "verify_symbol_bound",
]
