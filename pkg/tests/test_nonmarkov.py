import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jch.dynamics import InitialAmplitudes, coherence_series
from jch.model import ModelParams
from jch.nonmarkov import (
    AliasingWarning,
    ScanSpec,
    converged_horizon,
    gamma_sign_intervals,
    nonmarkovianity,
    tail_bound,
    trace_distance_backflow,
)
from jch.rates import decay_rate

MEMORY = ModelParams(lambda_=0.1, delta=10.0)


def test_markovian_point_has_no_backflow():
    rep = nonmarkovianity(ModelParams(lambda_=1.0), extend_horizon=True)
    assert rep.N == 0.0
    assert rep.converged
    assert len(rep.intervals) == 1 and not rep.intervals[0].negative


def test_frozen_value_at_fixed_horizon():
    rep = nonmarkovianity(MEMORY, T=50.0)
    assert rep.N == pytest.approx(0.014424534388, rel=1e-9)
    assert rep.horizon == 50.0
    assert not rep.converged  # tail after T = 50 not yet below 1e-6


def test_extension_meets_tail_tolerance():
    rep = nonmarkovianity(MEMORY, extend_horizon=True)
    assert rep.converged and rep.tail_bound < 1e-6
    assert rep.horizon > 50.0
    fixed = nonmarkovianity(MEMORY, T=rep.horizon + 50.0)
    assert abs(fixed.N - rep.N) <= rep.tail_bound


def test_intervals_tile_the_horizon_with_alternating_signs():
    T = 30.0
    ivs = gamma_sign_intervals(MEMORY, T)
    assert ivs[0].t_start == 0.0 and ivs[-1].t_end == T
    for a, b in zip(ivs, ivs[1:]):
        assert a.t_end == b.t_start
        assert a.negative != b.negative
    for iv in ivs:
        mid = 0.5 * (iv.t_start + iv.t_end)
        assert (decay_rate(MEMORY, mid) < 0) == iv.negative
    # endpoints are roots of Gamma
    roots = np.array([iv.t_end for iv in ivs[:-1]])
    assert np.max(np.abs(decay_rate(MEMORY, roots))) < 1e-9


def test_backflow_equals_positive_coherence_increments():
    init = InitialAmplitudes.normalized(0.6, 0.8)
    rep = nonmarkovianity(MEMORY, init, T=40.0)
    t = np.linspace(0, 40.0, 400_001)
    c = coherence_series(init, MEMORY, t)
    dense = math.fsum(np.maximum(np.diff(c), 0.0))
    assert rep.N == pytest.approx(dense, abs=1e-7)
    assert rep.N == pytest.approx(math.fsum(rep.contributions))


def test_trace_distance_backflow():
    rep = nonmarkovianity(MEMORY, T=40.0)
    assert trace_distance_backflow(MEMORY, rep.intervals) == pytest.approx(rep.N, abs=1e-12)


def test_tail_bound_decreases():
    init = InitialAmplitudes.equatorial()
    bounds = [tail_bound(MEMORY, init, T) for T in (10, 50, 100, 200)]
    assert all(b > c for b, c in zip(bounds, bounds[1:]))
    T = converged_horizon(MEMORY, init, 10.0)
    # solved with a factor-two margin on the tolerance
    assert 0.25e-6 < tail_bound(MEMORY, init, T) < 1e-6
    assert converged_horizon(MEMORY, init, 10.0, max_horizon=20.0) == 20.0


def test_scan_options():
    with pytest.warns(AliasingWarning):
        gamma_sign_intervals(MEMORY, 10.0, scan=ScanSpec(h=0.5))
    with pytest.raises(ValueError):
        gamma_sign_intervals(MEMORY, 10.0, scan=ScanSpec(h=-1.0))
    with pytest.raises(ValueError):
        gamma_sign_intervals(MEMORY, 0.0)


def test_phonon_dressing_suppresses_backflow():
    bare = nonmarkovianity(ModelParams(lambda_=0.3, delta=5.0), extend_horizon=True)
    dressed = nonmarkovianity(ModelParams(lambda_=0.3, delta=5.0, g_p=2.0), extend_horizon=True)
    assert 0 < dressed.N < bare.N / 5


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.0, 10.0), st.floats(0.0, 2.5), st.floats(0.0, 1.0))
def test_backflow_is_nonnegative_and_scales_with_initial_coherence(lam, delta, g, frac):
    p = ModelParams(lambda_=lam, delta=delta, g_p=g)
    a = math.sqrt(frac)
    init = InitialAmplitudes.normalized(a, math.sqrt(1 - frac))
    rep = nonmarkovianity(p, init, T=20.0)
    ref = nonmarkovianity(p, T=20.0)
    assert rep.N >= 0
    assert rep.N == pytest.approx(init.coherence0 * ref.N, rel=1e-12, abs=1e-300)
