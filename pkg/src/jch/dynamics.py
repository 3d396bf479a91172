"""Reduced qubit state, amplitude-damping Kraus channel, l1 coherence and
trace distance, all driven by the cumulative integrals of :mod:`jch.rates`.

Index convention: basis state 0 carries the decaying population
``|a|^2 G0``; state 1 is the absorbing one.  The decoherence factors are
``G0 = exp(-2 gamma)`` and ``G1 = exp(-gamma + i Phi)``, so ``G0 == |G1|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StateError
from .model import ModelParams
from .rates import DEFAULT_TRUNCATION, TruncationSpec, cumulative_arrays

STATE_TOL = 1e-12
KRAUS_TOL = 1e-10


@dataclass(frozen=True)
class InitialAmplitudes:
    """Pure initial qubit state ``a|0> + b|1>``."""

    a: complex
    b: complex

    def __post_init__(self):
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > STATE_TOL:
            raise StateError(f"|a|^2 + |b|^2 = {norm!r}, expected 1")

    @classmethod
    def equatorial(cls, phase: float = 0.0) -> "InitialAmplitudes":
        s = 1.0 / math.sqrt(2.0)
        return cls(complex(s), s * complex(math.cos(phase), math.sin(phase)))

    @classmethod
    def normalized(cls, a: complex, b: complex) -> "InitialAmplitudes":
        n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        if n == 0.0:
            raise StateError("amplitudes are both zero")
        return cls(complex(a) / n, complex(b) / n)

    @property
    def rho(self) -> np.ndarray:
        psi = np.array([self.a, self.b], dtype=complex)
        return np.outer(psi, psi.conj())

    @property
    def coherence0(self) -> float:
        """Initial l1 coherence ``2|ab|``."""
        return 2.0 * abs(self.a * self.b)


@dataclass(frozen=True)
class DecoherenceFactors:
    t: float
    G0: float
    G1: complex


@dataclass(frozen=True)
class QubitState:
    rho: np.ndarray

    def __post_init__(self):
        check_state(self.rho)


@dataclass(frozen=True)
class KrausPair:
    K0: np.ndarray
    K1: np.ndarray

    def completeness_error(self) -> float:
        s = self.K0.conj().T @ self.K0 + self.K1.conj().T @ self.K1
        return float(np.max(np.abs(s - np.eye(2))))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return self.K0 @ rho @ self.K0.conj().T + self.K1 @ rho @ self.K1.conj().T


def check_state(rho: np.ndarray, tol: float = STATE_TOL) -> None:
    """Raise StateError unless ``rho`` is a Hermitian, unit-trace, PSD 2x2 matrix.

    Violations are reported, never repaired.
    """
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        raise StateError(f"expected a 2x2 matrix, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise StateError(f"density matrix not Hermitian (deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise StateError(f"density matrix trace {tr!r} != 1")
    low = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if low < -tol:
        raise StateError(f"density matrix has negative eigenvalue {low:.3e}")


def decoherence_arrays(p: ModelParams, t, trunc: TruncationSpec = DEFAULT_TRUNCATION):
    """Vectorised ``(G0, G1)`` over a time array."""
    gamma, phi = cumulative_arrays(p, t, trunc)
    return np.exp(-2.0 * gamma), np.exp(-gamma + 1j * phi)


def decoherence_factors(
    p: ModelParams, t: float, trunc: TruncationSpec = DEFAULT_TRUNCATION
) -> DecoherenceFactors:
    if t < 0:
        raise ValueError("t must be non-negative")
    G0, G1 = decoherence_arrays(p, float(t), trunc)
    return DecoherenceFactors(float(t), float(G0), complex(G1))


def _density(init: InitialAmplitudes, G0: float, G1: complex) -> np.ndarray:
    pop = abs(init.a) ** 2 * G0
    coh = init.a * np.conj(init.b) * G1
    return np.array([[pop, coh], [np.conj(coh), 1.0 - pop]], dtype=complex)


def evolve_density(
    init: InitialAmplitudes, p: ModelParams, t: float, trunc: TruncationSpec = DEFAULT_TRUNCATION
) -> QubitState:
    """Closed-form ``rho_q(t)``: population ``|a|^2 G0`` and coherence
    ``rho_01(0) * G1`` with ``rho_01(0) = a b*``."""
    f = decoherence_factors(p, t, trunc)
    return QubitState(_density(init, f.G0, f.G1))


def kraus_from_factors(G0: float, G1: complex) -> KrausPair:
    if G0 > 1.0 + KRAUS_TOL:
        raise StateError(f"G0 = {G0!r} exceeds 1; channel is not CPTP")
    K0 = np.array([[G1, 0.0], [0.0, 1.0]], dtype=complex)
    # transfers amplitude 0 -> 1, matching the population flow of the closed form
    K1 = np.array([[0.0, 0.0], [math.sqrt(max(0.0, 1.0 - G0)), 0.0]], dtype=complex)
    return KrausPair(K0, K1)


def kraus_pair(p: ModelParams, t: float, trunc: TruncationSpec = DEFAULT_TRUNCATION) -> KrausPair:
    f = decoherence_factors(p, t, trunc)
    return kraus_from_factors(f.G0, f.G1)


def coherence_l1(state: QubitState | np.ndarray) -> float:
    rho = state.rho if isinstance(state, QubitState) else np.asarray(state)
    return float(np.sum(np.abs(rho)) - np.sum(np.abs(np.diag(rho))))


def coherence_series(
    init: InitialAmplitudes, p: ModelParams, t, trunc: TruncationSpec = DEFAULT_TRUNCATION
):
    """``C_l1(t) = 2|ab| e^{-gamma(t)}`` over a time array."""
    gamma, _ = cumulative_arrays(p, t, trunc)
    return init.coherence0 * np.exp(-gamma)


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))))


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    return 0.5 * trace_norm(np.asarray(rho1) - np.asarray(rho2))


def trace_distance_pair(
    p: ModelParams,
    t: float,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
    method: str = "closed",
) -> float:
    """Trace distance between the evolved antipodal equatorial states
    ``(|0> + |1>)/sqrt 2`` and ``(|0> - |1>)/sqrt 2`` (initial distance 1).

    ``method="closed"`` returns ``e^{-gamma(t)}``; ``method="direct"`` evolves
    both states and takes half the trace norm of their difference.
    """
    if method == "closed":
        gamma, _ = cumulative_arrays(p, float(t), trunc)
        return float(np.exp(-gamma))
    if method == "direct":
        s = 1.0 / math.sqrt(2.0)
        r1 = evolve_density(InitialAmplitudes(s, s), p, t, trunc).rho
        r2 = evolve_density(InitialAmplitudes(s, -s), p, t, trunc).rho
        return trace_distance(r1, r2)
    raise ValueError(f"unknown method {method!r}")
