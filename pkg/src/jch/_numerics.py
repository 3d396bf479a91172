"""Small numerical kernels: compensated summation and the phi-functions
used by the exact per-sideband antiderivatives."""

from __future__ import annotations

import numpy as np

# beyond this decay exponent the damped factor is below double resolution
FLUSH_EXPONENT = 36.0

_PHI2_SERIES_RADIUS = 0.5
_PHI2_SERIES_TERMS = 20


class CompensatedSum:
    """Neumaier-compensated running sum, elementwise over numpy arrays.

    Works for real or complex addends; real and imaginary parts are
    compensated independently by the same error-free transformation.
    """

    def __init__(self, shape=(), dtype=float):
        self.total = np.zeros(shape, dtype=dtype)
        self._comp = np.zeros(shape, dtype=dtype)

    def add(self, value) -> None:
        value = np.asarray(value)
        s = self.total + value
        if np.iscomplexobj(s):
            self._comp += _two_sum_err(self.total.real, value.real, s.real) + 1j * _two_sum_err(
                self.total.imag, value.imag, s.imag
            )
        else:
            self._comp += _two_sum_err(self.total, value, s)
        self.total = s

    def result(self):
        return self.total + self._comp


def _two_sum_err(a, b, s):
    # rounding error of s = fl(a + b), valid whatever the magnitude ordering
    big = np.abs(a) >= np.abs(b)
    return np.where(big, (a - s) + b, (b - s) + a)


def damped_expm1(x):
    """``exp(x) - 1`` for complex ``x`` with the exponential flushed to zero
    once ``Re(x) < -FLUSH_EXPONENT``."""
    x = np.asarray(x, dtype=complex)
    out = np.expm1(x)
    return np.where(x.real < -FLUSH_EXPONENT, -1.0 + 0.0j, out)


def phi2(x):
    """``(exp(x) - 1 - x) / x**2``, accurate near ``x = 0``."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < _PHI2_SERIES_RADIUS
    out = np.empty_like(x)
    if np.any(small):
        xs = x[small]
        # Horner on sum_{n>=0} x^n / (n+2)!
        acc = np.zeros_like(xs)
        for n in range(_PHI2_SERIES_TERMS, -1, -1):
            acc = acc * xs / (n + 3) + 1.0
        out[small] = acc / 2.0
    big = ~small
    if np.any(big):
        xb = x[big]
        out[big] = (damped_expm1(xb) - xb) / (xb * xb)
    return out
