"""Phonon-dressed decay rate and Lamb shift as phonon-sideband series.

In the polaron frame the vacuum phonon correlator expands as a Poisson
mixture of sidebands, ``exp(4 g^2 e^{i W s}) e^{-4 g^2} = sum_l w_l e^{i W l s}``
with ``w_l = Poisson(l; 4 g^2)``.  Each sideband ``l`` contributes a Lorentzian
kernel with complex decay constant ``z_l = lambda - i theta_l``,
``theta_l = delta + omega_ph * l``, so that

    Gamma(t) + i S(t)      = (gamma0 lambda / 2) sum_l w_l (1 - e^{-z_l t}) / z_l
    gamma(t) + i Phi(t)    = (gamma0 lambda / 2) sum_l w_l t^2 phi2(-z_l t)

where ``phi2(x) = (e^x - 1 - x) / x^2``.  The second line is the exact
antiderivative of the first, so cumulative quantities carry no step-size
error.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._numerics import FLUSH_EXPONENT, CompensatedSum, damped_expm1, phi2
from .errors import TruncationError
from .model import ModelParams, validate_params


@dataclass(frozen=True)
class TruncationSpec:
    rel_tol: float = 1e-12
    max_terms: int = 512

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_TRUNCATION = TruncationSpec()


@dataclass(frozen=True)
class RateSample:
    t: float
    Gamma: float
    S: float
    gamma_cum: float
    phi_cum: float


def correlation_function(p: ModelParams, s):
    """Bath correlation ``C(s)`` in the polaron frame (closed form, no series).

    Product of the Lorentzian cavity kernel ``(gamma0 lambda/2) e^{-(lambda - i delta) s}``
    and the phonon vacuum correlator ``exp(4 g^2 (e^{i W s} - 1))``.
    """
    s = np.asarray(s, dtype=float)
    mu = 4.0 * p.g_p**2
    out = (
        0.5
        * p.gamma0
        * p.lambda_
        * np.exp(-(p.lambda_ - 1j * p.delta) * s + mu * np.expm1(1j * p.omega_ph * s))
    )
    return complex(out) if out.ndim == 0 else out


def sideband_count(g_p: float, trunc: TruncationSpec = DEFAULT_TRUNCATION) -> int:
    """Smallest ``L`` whose Poisson(4 g_p^2) tail beyond ``L`` is below ``rel_tol``.

    Raises TruncationError if that needs more than ``max_terms`` terms.
    """
    mu = 4.0 * g_p**2
    if mu == 0.0:
        return 0
    ks = np.arange(trunc.max_terms)
    tails = stats.poisson.sf(ks, mu)
    hit = np.flatnonzero(tails < trunc.rel_tol)
    if hit.size == 0:
        raise TruncationError(
            f"sideband series for g_p={g_p} needs more than max_terms={trunc.max_terms} "
            f"terms to reach rel_tol={trunc.rel_tol}"
        )
    return int(hit[0])


class SidebandSeries:
    """Truncated sideband expansion for one parameter set.

    Build through :func:`series_for`, which caches instances.
    """

    def __init__(self, p: ModelParams, trunc: TruncationSpec = DEFAULT_TRUNCATION):
        validate_params(p, allow_decoupled=True)
        self.params = p
        self.trunc = trunc
        self.L = sideband_count(p.g_p, trunc)
        mu = 4.0 * p.g_p**2
        ls = np.arange(self.L + 1)
        self.weights = stats.poisson.pmf(ls, mu) if mu > 0 else np.ones(1)
        self.theta = p.delta + p.omega_ph * ls
        self.z = p.lambda_ - 1j * self.theta
        self.prefactor = 0.5 * p.gamma0 * p.lambda_

    @property
    def max_frequency(self) -> float:
        """Fastest oscillation frequency present in the rates."""
        return float(np.max(np.abs(self.theta))) + self.params.lambda_

    def _sum(self, t, kernel):
        t = np.asarray(t, dtype=float)
        acc = CompensatedSum(t.shape, complex)
        for w, z in zip(self.weights, self.z):
            acc.add(w * kernel(z, t))
        return self.prefactor * acc.result()

    def rates(self, t):
        """Complex ``Gamma(t) + i S(t)``."""
        return self._sum(t, lambda z, t: -damped_expm1(-z * t) / z)

    def cumulative(self, t):
        """Complex ``gamma(t) + i Phi(t)``."""
        return self._sum(t, lambda z, t: t * t * phi2(-z * t))

    def decay_rate_fast(self, t):
        """``Gamma(t)`` by Horner evaluation in ``e^{i omega_ph t}``.

        Roughly ``L`` times cheaper than :meth:`rates`; absolute error is
        ``O(L eps)`` relative to the damped amplitude, which is ample for
        locating sign changes.
        """
        t = np.asarray(t, dtype=float)
        lam = self.params.lambda_
        coef = self.weights * np.conj(self.z) / np.abs(self.z) ** 2
        env = np.where(lam * t > FLUSH_EXPONENT, 0.0, np.exp(-lam * t))
        v = np.exp(1j * self.params.omega_ph * t)
        acc = np.full(t.shape, coef[-1], dtype=complex)
        for c in coef[-2::-1]:
            acc = acc * v + c
        osc = (acc * np.exp(1j * self.params.delta * t)).real
        return self.prefactor * (float(np.sum(coef.real)) - env * osc)

    def markov_limits(self) -> tuple[float, float]:
        """``(Gamma, S)`` as ``t -> infinity``."""
        inv = self.weights / self.z
        v = self.prefactor * complex(math.fsum(inv.real), math.fsum(inv.imag))
        return v.real, v.imag

    def damped_amplitude(self) -> float:
        """``B`` with ``|Gamma(t) - Gamma(inf)| <= B e^{-lambda t}``."""
        return float(self.prefactor * np.sum(self.weights / np.abs(self.z)))


@functools.lru_cache(maxsize=256)
def series_for(p: ModelParams, trunc: TruncationSpec = DEFAULT_TRUNCATION) -> SidebandSeries:
    return SidebandSeries(p, trunc)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def decay_rate(p: ModelParams, t, trunc: TruncationSpec = DEFAULT_TRUNCATION):
    """Time-dependent decay rate ``Gamma(t)``; ``Gamma(0) == 0`` exactly."""
    return _scalar_or_array(series_for(p, trunc).rates(t).real)


def lamb_shift(p: ModelParams, t, trunc: TruncationSpec = DEFAULT_TRUNCATION):
    """Time-dependent Lamb shift ``S(t)``."""
    return _scalar_or_array(series_for(p, trunc).rates(t).imag)


def cumulative_arrays(p: ModelParams, t, trunc: TruncationSpec = DEFAULT_TRUNCATION):
    """``(gamma(t), Phi(t))`` as arrays."""
    v = series_for(p, trunc).cumulative(t)
    return v.real, v.imag


def cumulative_rates(
    p: ModelParams, t_grid, trunc: TruncationSpec = DEFAULT_TRUNCATION
) -> list[RateSample]:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("t_grid must be a non-empty 1-D sequence")
    if t[0] < 0.0 or np.any(np.diff(t) < 0.0):
        raise ValueError("t_grid must be ascending and start at t >= 0")
    series = series_for(p, trunc)
    r = series.rates(t)
    c = series.cumulative(t)
    return [
        RateSample(float(ti), float(ri.real), float(ri.imag), float(ci.real), float(ci.imag))
        for ti, ri, ci in zip(t, r, c)
    ]
