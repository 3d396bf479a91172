"""Reduced qubit dynamics of the Jaynes-Cummings-Holstein model.

Phonon-dressed decay rates and Lamb shifts, the amplitude-damping channel
they generate, l1 coherence and its backflow, with brute-force oracles in
:mod:`jch.oracle`.
"""

from .dynamics import (
    DecoherenceFactors,
    InitialAmplitudes,
    KrausPair,
    QubitState,
    coherence_l1,
    coherence_series,
    decoherence_factors,
    evolve_density,
    kraus_pair,
    trace_distance,
    trace_distance_pair,
)
from .errors import ConvergenceError, JCHError, ParameterError, StateError, TruncationError
from .formats import serialize_result, write_result
from .model import ModelParams, ValidityReport, adiabaticity, spectral_density, validate_params
from .nonmarkov import BackflowReport, ScanSpec, SignInterval, gamma_sign_intervals, nonmarkovianity
from .rates import (
    RateSample,
    SidebandSeries,
    TruncationSpec,
    correlation_function,
    cumulative_rates,
    decay_rate,
    lamb_shift,
)
from .sweep import Axis, GridResult, SweepSpec, preset, run

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "BackflowReport",
    "ConvergenceError",
    "DecoherenceFactors",
    "GridResult",
    "InitialAmplitudes",
    "JCHError",
    "KrausPair",
    "ModelParams",
    "ParameterError",
    "QubitState",
    "RateSample",
    "ScanSpec",
    "SidebandSeries",
    "SignInterval",
    "StateError",
    "SweepSpec",
    "TruncationError",
    "TruncationSpec",
    "ValidityReport",
    "adiabaticity",
    "coherence_l1",
    "coherence_series",
    "correlation_function",
    "cumulative_rates",
    "decay_rate",
    "decoherence_factors",
    "evolve_density",
    "gamma_sign_intervals",
    "kraus_pair",
    "lamb_shift",
    "nonmarkovianity",
    "preset",
    "run",
    "serialize_result",
    "spectral_density",
    "trace_distance",
    "trace_distance_pair",
    "validate_params",
    "write_result",
]
