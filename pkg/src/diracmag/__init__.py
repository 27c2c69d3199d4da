"""Dia- and paramagnetic magnetizabilities of Dirac one-electron atoms."""

from .errors import (
    DiracMagError,
    DomainError,
    NonConvergenceError,
    OracleError,
    PrecisionLossError,
    QuadratureError,
    StateError,
)
from .hydrogenic import QuantumState, bound_radial, parse_state_label, relativistic_params
from .magnet import (
    MagnetizabilityBreakdown,
    chi_d,
    chi_ground_closed_forms,
    chi_p,
    chi_p_dprime,
    chi_p_prime_channel,
    chi_total,
    crossover_scan,
)
from .precision import ALPHA_INVERSE_1986, ALPHA_INVERSE_2018, PrecisionPolicy

__version__ = "0.1.0"

__all__ = [
    "ALPHA_INVERSE_1986",
    "ALPHA_INVERSE_2018",
    "DiracMagError",
    "DomainError",
    "MagnetizabilityBreakdown",
    "NonConvergenceError",
    "OracleError",
    "PrecisionLossError",
    "PrecisionPolicy",
    "QuadratureError",
    "QuantumState",
    "StateError",
    "bound_radial",
    "chi_d",
    "chi_ground_closed_forms",
    "chi_p",
    "chi_p_dprime",
    "chi_p_prime_channel",
    "chi_total",
    "crossover_scan",
    "parse_state_label",
    "relativistic_params",
]
