"""Moments of moments of characteristic polynomials of the circular beta ensemble."""

__version__ = "0.1.0"

from .asymptotics import (
    DomainError,
    FinitenessReport,
    asymptotic_ratio,
    coeff_general,
    coeff_k1,
    coeff_k1_integral,
    coeff_k2,
    exponent,
    finiteness_domain,
    volume_rejection,
)
from .combinatorics import ArraySpec, ContractViolation, ResourceLimitError, enumerate_I, enumerate_J
from .exact import jack_at_ones, mom_exact, mom_exact_J, mom_quadrature
from .jack import jack_eval, matsumoto_expectation, schur_eval
from .montecarlo import McConfig, mom_mc, sample_cbe
from .singularity import extremal_point, order_of, singularity_order, star_point, threshold_beta
from .weights import RationalParam, phi, psi, psi_gamma_form

__all__ = [
    "ArraySpec",
    "ContractViolation",
    "DomainError",
    "FinitenessReport",
    "McConfig",
    "RationalParam",
    "ResourceLimitError",
    "asymptotic_ratio",
    "coeff_general",
    "coeff_k1",
    "coeff_k1_integral",
    "coeff_k2",
    "enumerate_I",
    "enumerate_J",
    "exponent",
    "extremal_point",
    "finiteness_domain",
    "jack_at_ones",
    "jack_eval",
    "matsumoto_expectation",
    "mom_exact",
    "mom_exact_J",
    "mom_mc",
    "mom_quadrature",
    "order_of",
    "phi",
    "psi",
    "psi_gamma_form",
    "sample_cbe",
    "schur_eval",
    "singularity_order",
    "star_point",
    "threshold_beta",
    "volume_rejection",
]
