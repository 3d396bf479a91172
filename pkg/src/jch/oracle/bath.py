"""Midpoint discretisation of the Lorentzian cavity continuum."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ..model import ModelParams, validate_params


@dataclass(frozen=True)
class OracleConfig:
    """Truncations for the brute-force simulation.

    ``window_halfwidth=None`` means ``25 * lambda``; ``dt=None`` picks the
    step from ``dt_norm_product / ||H||``.
    """

    M: int = 300
    n_ph_max: int = 24
    dt: float | None = None
    window_halfwidth: float | None = None
    integrator_tol: float = 1e-8
    dt_norm_product: float = 0.09

    def window(self, p: ModelParams) -> float:
        return 25.0 * p.lambda_ if self.window_halfwidth is None else float(self.window_halfwidth)


def required_fock_cutoff(g_p: float) -> int:
    """Poisson mean plus six standard deviations (plus margin) of the displaced vacuum."""
    mu = 4.0 * g_p**2
    return math.ceil(mu + 6.0 * math.sqrt(mu) + 4.0)


@dataclass(frozen=True)
class BathDiscretization:
    mode_detunings: np.ndarray  # delta_k = omega0 - omega_k
    couplings: np.ndarray  # g_k = sqrt(J(omega_k) d omega)
    window_halfwidth: float
    M: int

    @property
    def spacing(self) -> float:
        return 2.0 * self.window_halfwidth / self.M

    def captured_weight(self) -> float:
        return float(math.fsum(self.couplings**2))

    def kernel(self, s) -> np.ndarray:
        """``sum_k g_k^2 e^{i delta_k s}``, the discrete counterpart of
        ``(gamma0 lambda / 2) e^{-(lambda - i delta) s}``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.exp(1j * np.outer(s, self.mode_detunings)) @ (self.couplings**2)


def discretize_bath(p: ModelParams, cfg: OracleConfig = OracleConfig()) -> BathDiscretization:
    """``M`` equally spaced modes over ``[delta - W, delta + W]`` in detuning."""
    validate_params(p, allow_decoupled=True)
    if cfg.M < 10:
        raise ParameterError("M", f"M must be >= 10 bath modes (got {cfg.M})")
    W = cfg.window(p)
    if W < 5.0 * p.lambda_:
        raise ParameterError(
            "window_halfwidth", f"window half-width {W} is below 5*lambda = {5 * p.lambda_}"
        )
    dw = 2.0 * W / cfg.M
    x = -W + dw * (np.arange(cfg.M) + 0.5)  # offset from the Lorentzian centre
    J = p.gamma0 / (2.0 * np.pi) * p.lambda_**2 / (x * x + p.lambda_**2)
    return BathDiscretization(
        mode_detunings=p.delta + x,
        couplings=np.sqrt(J * dw),
        window_halfwidth=W,
        M=cfg.M,
    )
