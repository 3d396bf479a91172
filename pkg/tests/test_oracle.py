import math
import warnings

import numpy as np
import pytest

from jch.dynamics import InitialAmplitudes, check_state, coherence_series
from jch.errors import ConvergenceError, ParameterError
from jch.formats import to_json
from jch.model import ModelParams
from jch.oracle import (
    OracleConfig,
    compare_oracle,
    discretize_bath,
    exact_evolution,
    identity_deviations,
    quadrature_rates,
    required_fock_cutoff,
    verify_polaron_transform,
)
from jch.oracle.quadrature import adaptive_integral, max_panel_width
from jch.rates import correlation_function

EQ = InitialAmplitudes.equatorial()


# --- quadrature -----------------------------------------------------------------


def test_adaptive_integral_on_known_integrals():
    v = adaptive_integral(np.cos, 0.0, 30.0, 1e-14, 0.5)
    assert v == pytest.approx(math.sin(30.0), abs=1e-13)
    v = adaptive_integral(lambda s: np.exp(-s) * np.exp(5j * s), 0.0, 10.0, 1e-14, 0.2)
    ref = (1 - np.exp(-(1 - 5j) * 10)) / (1 - 5j)
    assert abs(v - ref) < 1e-13
    assert adaptive_integral(np.cos, 1.0, 1.0, 1e-12, 1.0) == 0.0


def test_panel_width_resolves_fastest_oscillation():
    p = ModelParams(g_p=2.0, delta=10.0)
    f = 4 * 4.0 * 10.0 + 10.0 + 1.0
    assert max_panel_width(p) == pytest.approx(math.pi / (4 * f))


def test_quadrature_rejects_bad_input():
    with pytest.raises(ValueError):
        quadrature_rates(ModelParams(), -1.0)
    with pytest.raises(ValueError):
        quadrature_rates(ModelParams(), 1.0, tol=0.0)


# --- bath discretisation --------------------------------------------------------


def test_fock_cutoff_rule():
    assert required_fock_cutoff(0.0) == 4
    assert required_fock_cutoff(2.0) == math.ceil(16 + 24 + 4)


def test_discretisation_errors():
    p = ModelParams()
    with pytest.raises(ParameterError):
        discretize_bath(p, OracleConfig(M=5))
    with pytest.raises(ParameterError):
        discretize_bath(p, OracleConfig(window_halfwidth=2.0))


def test_kernel_converges_to_correlation_function():
    p = ModelParams(lambda_=1.0, delta=1.0)
    s = np.linspace(0, 5 / p.lambda_, 201)
    ref = correlation_function(p, s)

    def err(W, M):
        k = discretize_bath(p, OracleConfig(M=M, window_halfwidth=W)).kernel(s)
        return float(np.max(np.abs(k - ref)) / abs(ref[0]))

    assert err(200.0, 2400) < 0.01
    # doubling M at fixed spacing (so the window doubles too) halves the error
    assert err(100.0, 1200) / err(200.0, 2400) == pytest.approx(2.0, rel=0.02)


def test_captured_weight():
    p = ModelParams(gamma0=2.0, lambda_=0.5)
    b = discretize_bath(p, OracleConfig(M=400, window_halfwidth=50 * 0.5))
    # missing tail weight is (2/pi) arctan(lambda / W) of the total
    assert b.captured_weight() == pytest.approx(0.5 * (1 - 2 / math.pi * math.atan(1 / 50)), rel=1e-4)
    assert np.all(np.diff(b.mode_detunings) > 0)


# --- exact evolution ------------------------------------------------------------


def test_phonon_dressing_without_cavity_is_a_coherent_state_overlap():
    g, om = 0.3, 10.0
    p = ModelParams(gamma0=0.0, g_p=g, omega_ph=om)
    t = np.linspace(0, 1, 11)
    ev = exact_evolution(p, OracleConfig(M=20, n_ph_max=required_fock_cutoff(g) + 6), EQ, t)
    expected = np.exp(-4 * g * g * (1 - np.cos(om * t)))
    np.testing.assert_allclose(ev.coherence, expected, rtol=1e-9)
    assert ev.norm_drift < 1e-12


def test_decoupled_bare_qubit_is_frozen():
    ev = exact_evolution(ModelParams(gamma0=0.0), OracleConfig(M=20), EQ, [0.0, 3.0])
    np.testing.assert_allclose(ev.rho[-1], EQ.rho, atol=1e-13)


def test_weak_coupling_tracks_the_master_equation():
    p = ModelParams(gamma0=0.05)
    t = np.linspace(0, 10, 51)
    ev = exact_evolution(p, OracleConfig(M=300, n_ph_max=4), EQ, t)
    assert np.max(np.abs(ev.coherence - coherence_series(EQ, p, t))) < 0.01
    assert ev.norm_drift < 1e-10 and ev.steps > 0
    for ti, rho in ev:
        check_state(rho, tol=1e-9)
    assert len(ev) == 51


def test_exact_evolution_guards():
    p = ModelParams(g_p=2.0)
    with pytest.raises(ParameterError, match="n_ph_max"):
        exact_evolution(p, OracleConfig(n_ph_max=10), EQ, [0.0, 1.0])
    with pytest.raises(ValueError):
        exact_evolution(ModelParams(), OracleConfig(M=20), EQ, [1.0, 0.5])
    with pytest.raises(ConvergenceError):
        exact_evolution(ModelParams(), OracleConfig(M=20, dt=0.5), EQ, [0.0, 20.0])
    loose = exact_evolution(ModelParams(), OracleConfig(M=20, dt=0.5), EQ, [0.0, 20.0], strict=False)
    assert loose.norm_drift > 1e-8


def test_comparison_report_serialises():
    p = ModelParams(gamma0=0.05)
    rep = compare_oracle(p, OracleConfig(M=100, n_ph_max=4), EQ, np.linspace(0, 4, 9))
    assert rep.scaling_ratio is None
    assert rep.max_abs_coherence_dev == pytest.approx(float(np.max(rep.coherence_dev)))
    res = rep.to_grid_result()
    assert res.fields["C_exact"].shape == (9,)
    assert b'"max_rel_gamma_dev"' in to_json(res)


# --- polaron identities ---------------------------------------------------------


@pytest.mark.parametrize("g", [0.25, 0.5, 1.0])
def test_polaron_identities(g):
    devs = identity_deviations(g, 40)
    assert set(devs) == {"sigma_plus", "phonon_hamiltonian", "sigma_z"}
    assert max(devs.values()) < 1e-8
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert verify_polaron_transform(g, 40) == max(devs.values())


def test_polaron_truncation_improves_until_roundoff():
    floor = 1e-11
    worst = [max(identity_deviations(1.0, n).values()) for n in (10, 20, 30, 40, 50)]
    for a, b in zip(worst, worst[1:]):
        assert b < a or max(a, b) < floor
    with pytest.raises(ValueError):
        verify_polaron_transform(1.0, 1)
