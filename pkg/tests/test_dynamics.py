import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jch.dynamics import (
    InitialAmplitudes,
    QubitState,
    check_state,
    coherence_l1,
    coherence_series,
    decoherence_arrays,
    decoherence_factors,
    evolve_density,
    kraus_from_factors,
    kraus_pair,
    trace_distance,
    trace_distance_pair,
    trace_norm,
)
from jch.errors import StateError
from jch.model import ModelParams
from jch.rates import cumulative_arrays


def test_initial_amplitudes_normalisation():
    with pytest.raises(StateError):
        InitialAmplitudes(1.0, 1.0)
    with pytest.raises(StateError):
        InitialAmplitudes.normalized(0, 0)
    s = InitialAmplitudes.normalized(3, 4j)
    assert (s.a, s.b) == (0.6, 0.8j)
    assert s.coherence0 == pytest.approx(0.96)
    eq = InitialAmplitudes.equatorial(math.pi / 2)
    np.testing.assert_allclose(eq.rho, [[0.5, -0.5j], [0.5j, 0.5]], atol=1e-16)


def test_state_checks():
    check_state(np.diag([0.3, 0.7]))
    for bad in (
        np.eye(3) / 3,
        np.array([[0.5, 0.1], [0.2, 0.5]]),
        np.diag([0.5, 0.6]),
        np.array([[0.5, 0.6], [0.6, 0.5]]),
    ):
        with pytest.raises(StateError):
            QubitState(bad)


def test_factors_at_time_zero():
    f = decoherence_factors(ModelParams(g_p=1.0, delta=2.0), 0.0)
    assert (f.G0, f.G1) == (1.0, 1.0)
    with pytest.raises(ValueError):
        decoherence_factors(ModelParams(), -1.0)


def test_closed_form_entries():
    p = ModelParams(lambda_=0.3, delta=1.0, g_p=0.5)
    init = InitialAmplitudes.normalized(0.6, 0.8 * np.exp(0.4j))
    t = 3.0
    gamma, phi = cumulative_arrays(p, t)
    rho = evolve_density(init, p, t).rho
    assert rho[0, 0].real == pytest.approx(0.36 * math.exp(-2 * gamma))
    assert rho[0, 1] == pytest.approx(init.a * np.conj(init.b) * np.exp(-gamma + 1j * phi))
    assert rho[1, 1].real == pytest.approx(1 - 0.36 * math.exp(-2 * gamma))


def test_coherence_matches_density_matrix():
    p = ModelParams(lambda_=0.1, delta=10.0)
    init = InitialAmplitudes.normalized(1, 2)
    ts = np.linspace(0, 20, 9)
    series = coherence_series(init, p, ts)
    direct = [coherence_l1(evolve_density(init, p, t)) for t in ts]
    np.testing.assert_allclose(series, direct, rtol=1e-13)
    assert coherence_l1(np.diag([0.2, 0.8])) == 0.0


def test_kraus_completeness_and_orientation():
    k = kraus_from_factors(0.25, 0.5j)
    assert k.completeness_error() < 1e-15
    # population leaves |0> for |1>
    out = k.apply(np.diag([1.0, 0.0]).astype(complex))
    np.testing.assert_allclose(out, np.diag([0.25, 0.75]), atol=1e-16)
    with pytest.raises(StateError):
        kraus_from_factors(1.5, 1.0)


amp = st.tuples(st.floats(-1, 1), st.floats(-1, 1)).filter(lambda v: abs(complex(*v)) > 1e-3)


@settings(max_examples=60, deadline=None)
@given(
    amp,
    amp,
    st.floats(0.05, 5),
    st.floats(-10, 10),
    st.floats(0, 2.5),
    st.floats(0, 40),
)
def test_kraus_reproduces_closed_form(a, b, lam, delta, g, t):
    p = ModelParams(lambda_=lam, delta=delta, g_p=g)
    init = InitialAmplitudes.normalized(complex(*a), complex(*b))
    k = kraus_pair(p, t)
    assert k.completeness_error() <= 1e-10
    out = k.apply(init.rho)
    np.testing.assert_allclose(out, evolve_density(init, p, t).rho, atol=1e-12, rtol=0)
    check_state(out)


def test_vectorised_factors_agree_with_scalar():
    p = ModelParams(g_p=1.0, lambda_=0.5)
    ts = np.array([0.0, 0.5, 3.0])
    G0, G1 = decoherence_arrays(p, ts)
    for i, t in enumerate(ts):
        f = decoherence_factors(p, t)
        assert (G0[i], G1[i]) == pytest.approx((f.G0, f.G1), rel=1e-15)
    np.testing.assert_allclose(np.abs(G1) ** 2, G0, rtol=1e-14)


def test_trace_distance_helpers():
    assert trace_norm(np.diag([0.5, -0.5])) == pytest.approx(1.0)
    assert trace_distance(np.diag([1, 0]), np.diag([0, 1])) == pytest.approx(1.0)
    p = ModelParams(lambda_=0.1, delta=10.0)
    for t in (0.0, 1.3, 17.0):
        closed = trace_distance_pair(p, t)
        assert trace_distance_pair(p, t, method="direct") == pytest.approx(closed, rel=1e-12, abs=1e-15)
    with pytest.raises(ValueError):
        trace_distance_pair(p, 1.0, method="bogus")
