import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jch._numerics import CompensatedSum, damped_expm1, phi2

finite = st.floats(-1e12, 1e12, allow_nan=False)


@given(st.lists(finite, min_size=1, max_size=60))
def test_compensated_sum_matches_fsum(xs):
    acc = CompensatedSum()
    for x in xs:
        acc.add(x)
    exact = math.fsum(xs)
    assert float(acc.result()) == pytest.approx(exact, rel=1e-15, abs=1e-3 * np.finfo(float).eps)


def test_compensated_sum_recovers_cancellation():
    acc = CompensatedSum((2,), complex)
    for v in (1e16 + 1e16j, 1.0 + 2.0j, -1e16 - 1e16j):
        acc.add(np.array([v, 2 * v]))
    np.testing.assert_array_equal(acc.result(), [1.0 + 2.0j, 2.0 + 4.0j])
    naive = (1e16 + 1.0) - 1e16
    assert naive != 1.0


def mp_phi2(x: complex) -> complex:
    with mp.workdps(40):
        z = mp.mpc(x)
        return complex((mp.exp(z) - 1 - z) / z**2)


@pytest.mark.parametrize(
    "x", [1e-12, -1e-6 + 1e-6j, 0.3j, -0.49, 0.499 + 0.01j, -0.51, 0.5 - 0.2j, -3 + 40j, -20.0, -35 - 1j]
)
def test_phi2_against_mpmath(x):
    assert complex(phi2(x)) == pytest.approx(mp_phi2(x), rel=1e-14)


def test_phi2_at_zero_and_flush():
    assert complex(phi2(0.0)) == 0.5
    x = np.array([-40.0 + 3j, -1e4 + 0j])
    np.testing.assert_allclose(phi2(x), (-1.0 - x) / x**2, rtol=1e-15)


def test_damped_expm1_flushes_below_threshold():
    assert complex(damped_expm1(-37.0 + 5j)) == -1.0
    assert complex(damped_expm1(-1e-20)) == pytest.approx(-1e-20)
