import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from jch.errors import ParameterError
from jch.model import ModelParams, adiabaticity, spectral_density, validate_params

positive = st.floats(1e-3, 1e3)


def test_defaults_are_valid():
    p = ModelParams()
    assert validate_params(p) is p
    assert p.to_dict() == {
        "gamma0": 1.0,
        "lambda": 1.0,
        "delta": 0.0,
        "omega_ph": 10.0,
        "g_p": 0.0,
        "omega0": 0.0,
    }


def test_replace_accepts_public_names():
    p = ModelParams().replace(**{"lambda": 0.3, "g_p": 2})
    assert p.lambda_ == 0.3 and p.g_p == 2.0


@given(positive, positive, st.floats(-50, 50), positive, st.floats(0, 5))
def test_dict_round_trip(g0, lam, delta, om, gp):
    p = ModelParams(g0, lam, delta, om, gp)
    assert ModelParams.from_dict(p.to_dict()) == p


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ParameterError) as err:
        ModelParams.from_dict({"kappa": 1})
    assert err.value.field == "kappa"


@pytest.mark.parametrize(
    "change, field",
    [
        ({"lambda": 0.0}, "lambda"),
        ({"lambda": -1.0}, "lambda"),
        ({"gamma0": 0.0}, "gamma0"),
        ({"omega_ph": 0.0}, "omega_ph"),
        ({"g_p": -0.1}, "g_p"),
        ({"delta": math.nan}, "delta"),
        ({"omega0": math.inf}, "omega0"),
    ],
)
def test_validation_names_the_field(change, field):
    with pytest.raises(ParameterError, match=field) as err:
        validate_params(ModelParams().replace(**change))
    assert err.value.field == field
    assert isinstance(err.value, ValueError)


def test_decoupled_cavity_only_on_request():
    p = ModelParams(gamma0=0.0)
    with pytest.raises(ParameterError):
        validate_params(p)
    assert validate_params(p, allow_decoupled=True) is p


def test_spectral_density_peak_and_weight():
    p = ModelParams(gamma0=2.0, lambda_=0.7, delta=1.5, omega0=3.0)
    peak = p.omega0 - p.delta
    assert spectral_density(p, peak) == pytest.approx(p.gamma0 / (2 * math.pi), rel=1e-15)
    # total weight equals C(0) = gamma0 lambda / 2
    total, _ = integrate.quad(lambda w: spectral_density(p, w), -np.inf, np.inf)
    assert total == pytest.approx(p.gamma0 * p.lambda_ / 2, rel=1e-8)


def test_spectral_density_is_vectorised_and_symmetric():
    p = ModelParams(lambda_=0.5, delta=2.0)
    x = np.linspace(0, 5, 7)
    left = spectral_density(p, -p.delta - x)
    right = spectral_density(p, -p.delta + x)
    assert left.shape == (7,)
    np.testing.assert_allclose(left, right, rtol=1e-15)


def test_adiabaticity_flag():
    rep = adiabaticity(ModelParams(g_p=2.0))
    assert rep.epsilon == pytest.approx(math.exp(-8.0) / 10.0)
    assert rep.anti_adiabatic
    assert not adiabaticity(ModelParams(omega_ph=1.0)).anti_adiabatic
    assert adiabaticity(ModelParams(omega_ph=1.0), threshold=2.0).anti_adiabatic
