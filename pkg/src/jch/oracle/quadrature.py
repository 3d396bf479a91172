"""Adaptive Gauss-Legendre panel quadrature of the closed-form correlation
integral ``int_0^t C(s) ds``.

Deliberately shares nothing with the sideband series: the integrand is the
closed-form product ``C(s)`` from :func:`jch.rates.correlation_function`.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConvergenceError
from ..model import ModelParams
from ..rates import correlation_function

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(16)


def max_panel_width(p: ModelParams) -> float:
    """Width keeping the accumulated phase per panel below pi/4."""
    return math.pi / (4.0 * (p.omega_ph * 4.0 * p.g_p**2 + abs(p.delta) + p.lambda_))


_ROUNDOFF = 64.0 * np.finfo(float).eps


def _gauss(f, a: np.ndarray, b: np.ndarray):
    """Panel integrals of ``f`` and of ``|f|`` (the latter sets the round-off floor)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    s = mid[:, None] + half[:, None] * _NODES[None, :]
    v = f(s)
    return half * (v @ _WEIGHTS), half * (np.abs(v) @ _WEIGHTS)


def adaptive_integral(
    f,
    a: float,
    b: float,
    tol: float,
    max_width: float,
    cond: float = 1.0,
    max_panels: int = 2_000_000,
):
    """Integrate complex ``f`` over ``[a, b]`` to absolute error ``tol``.

    Panels no wider than ``max_width`` are refined by bisection until the
    one-panel vs two-half-panel estimates agree to the panel's share of
    ``tol``, or to the round-off floor ``cond * eps`` times the panel's
    absolute integral.  ``cond`` is the relative condition number of
    evaluating ``f`` (phase rate times abscissa for oscillatory integrands).
    Raises ConvergenceError when the panel budget runs out.
    """
    if b <= a:
        return 0.0 + 0.0j
    n0 = max(1, math.ceil((b - a) / max_width))
    edges = np.linspace(a, b, n0 + 1)
    lo, hi = edges[:-1], edges[1:]
    coarse, _ = _gauss(f, lo, hi)
    accepted_re: list[float] = []
    accepted_im: list[float] = []
    total = b - a
    while lo.size:
        if lo.size > max_panels:
            raise ConvergenceError(f"quadrature exceeded {max_panels} panels")
        mid = 0.5 * (lo + hi)
        left, left_abs = _gauss(f, lo, mid)
        right, right_abs = _gauss(f, mid, hi)
        fine = left + right
        err = np.abs(fine - coarse)
        ok = err <= np.maximum(tol * (hi - lo) / total, _ROUNDOFF * cond * (left_abs + right_abs))
        accepted_re.extend(fine[ok].real.tolist())
        accepted_im.extend(fine[ok].imag.tolist())
        bad = ~ok
        if np.any(bad) and np.min(hi[bad] - lo[bad]) < 1e-14 * total:
            raise ConvergenceError("quadrature panel width underflow")
        lo = np.concatenate((lo[bad], mid[bad]))
        hi = np.concatenate((mid[bad], hi[bad]))
        coarse = np.concatenate((left[bad], right[bad]))
    return complex(math.fsum(accepted_re), math.fsum(accepted_im))


def _condition(p: ModelParams, t: float) -> float:
    return 1.0 + (p.omega_ph * 4.0 * p.g_p**2 + abs(p.delta) + p.lambda_) * t


def quadrature_rates(p: ModelParams, t: float, tol: float = 1e-14) -> tuple[float, float]:
    """``(Gamma(t), S(t))`` as real and imaginary parts of ``int_0^t C(s) ds``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = adaptive_integral(
        lambda s: correlation_function(p, s), 0.0, float(t), tol, max_panel_width(p), _condition(p, t)
    )
    return v.real, v.imag


def quadrature_cumulative(p: ModelParams, t: float, tol: float = 1e-12) -> tuple[float, float]:
    """``(gamma(t), Phi(t))`` by quadrature of ``(t - s) C(s)`` over ``[0, t]``.

    Uses ``int_0^t du int_0^u C(s) ds = int_0^t (t - s) C(s) ds``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    v = adaptive_integral(
        lambda s: (t - s) * correlation_function(p, s),
        0.0,
        float(t),
        tol,
        max_panel_width(p),
        _condition(p, t),
    )
    return v.real, v.imag
