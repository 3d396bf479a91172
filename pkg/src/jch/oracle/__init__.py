"""Independent ground-truth generators used to validate the analytic chain."""

from .bath import BathDiscretization, OracleConfig, discretize_bath, required_fock_cutoff
from .compare import ComparisonReport, compare_oracle
from .exact import ExactEvolution, exact_evolution
from .polaron import identity_deviations, verify_polaron_transform
from .quadrature import quadrature_cumulative, quadrature_rates

__all__ = [
    "BathDiscretization",
    "ComparisonReport",
    "ExactEvolution",
    "OracleConfig",
    "compare_oracle",
    "discretize_bath",
    "exact_evolution",
    "identity_deviations",
    "quadrature_cumulative",
    "quadrature_rates",
    "required_fock_cutoff",
    "verify_polaron_transform",
]
