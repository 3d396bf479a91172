"""Physical parameters, the Lorentzian cavity spectral density and the
anti-adiabaticity diagnostic.

Units: ``gamma0`` sets the frequency scale, so every default below is quoted
in units of ``gamma0 = 1`` (times in units of ``1/gamma0``).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .errors import ParameterError

#: anti-adiabatic flag threshold on ``epsilon``; diagnostic only
EPSILON_THRESHOLD = 0.1

_POSITIVE = ("gamma0", "lambda_", "omega_ph")

# public field name <-> dataclass attribute (``lambda`` is a keyword)
PARAM_NAMES = {
    "gamma0": "gamma0",
    "lambda": "lambda_",
    "delta": "delta",
    "omega_ph": "omega_ph",
    "g_p": "g_p",
    "omega0": "omega0",
}


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the Jaynes-Cummings-Holstein Hamiltonian.

    Attributes
    ----------
    gamma0 : effective qubit-cavity coupling (frequency unit).
    lambda_ : Lorentzian spectral width of the cavity.
    delta : detuning between qubit and cavity centre, ``omega0 - omega_c``.
    omega_ph : phonon frequency.
    g_p : dimensionless Holstein coupling.
    omega0 : qubit splitting; drops out of every rotating-frame quantity.
    """

    gamma0: float = 1.0
    lambda_: float = 1.0
    delta: float = 0.0
    omega_ph: float = 10.0
    g_p: float = 0.0
    omega0: float = 0.0

    def replace(self, **changes) -> "ModelParams":
        """Copy with fields overridden; accepts public names (``lambda``)."""
        mapped = {PARAM_NAMES.get(k, k): float(v) for k, v in changes.items()}
        return replace(self, **mapped)

    def to_dict(self) -> dict[str, float]:
        """Public-name dictionary in a fixed key order."""
        raw = asdict(self)
        return {pub: float(raw[attr]) for pub, attr in PARAM_NAMES.items()}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        known = {PARAM_NAMES.get(k, k): float(v) for k, v in data.items()}
        names = {f.name for f in fields(cls)}
        unknown = set(known) - names
        if unknown:
            raise ParameterError(sorted(unknown)[0], f"unknown parameter {sorted(unknown)[0]!r}")
        return cls(**known)


def _public(attr: str) -> str:
    return "lambda" if attr == "lambda_" else attr


def validate_params(raw: ModelParams, allow_decoupled: bool = False) -> ModelParams:
    """Return ``raw`` unchanged if every parameter lies in its domain.

    Raises :class:`ParameterError` naming the first offending field.
    ``allow_decoupled`` admits ``gamma0 == 0`` (cavity switched off), which
    only the brute-force checks need.
    """
    for f in fields(raw):
        value = getattr(raw, f.name)
        if not math.isfinite(value):
            raise ParameterError(_public(f.name), f"{_public(f.name)} must be finite (got {value!r})")
    for attr in _POSITIVE:
        if allow_decoupled and attr == "gamma0" and raw.gamma0 == 0.0:
            continue
        if getattr(raw, attr) <= 0.0:
            name = _public(attr)
            raise ParameterError(name, f"{name} must be positive (got {getattr(raw, attr)!r})")
    if raw.g_p < 0.0:
        raise ParameterError("g_p", f"g_p must be non-negative (got {raw.g_p!r})")
    return raw


def spectral_density(p: ModelParams, omega):
    """Lorentzian ``J(omega)`` centred at ``omega0 - delta``.

    Vectorised over ``omega``; peak value ``gamma0 / (2 pi)``.
    """
    x = np.asarray(omega, dtype=float) - p.omega0 + p.delta
    out = p.gamma0 / (2.0 * np.pi) * p.lambda_**2 / (x * x + p.lambda_**2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ValidityReport:
    epsilon: float
    anti_adiabatic: bool


def adiabaticity(p: ModelParams, threshold: float = EPSILON_THRESHOLD) -> ValidityReport:
    """Polaron-frame adiabaticity ``gamma0 * exp(-2 g_p**2) / omega_ph``."""
    eps = p.gamma0 * math.exp(-2.0 * p.g_p**2) / p.omega_ph
    return ValidityReport(epsilon=eps, anti_adiabatic=eps < threshold)
