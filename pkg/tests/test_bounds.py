import math
import pickle

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import bisect

from lossy_sensing.bounds import (
    Divergent,
    damping_bound_finite_T,
    damping_bound_zero_T,
    damping_sensitivity,
    error_propagation,
    generator_qfi,
    golden_section_minimize,
    is_divergent,
    optimal_interaction_time,
    purification_ratio,
    steady_state_temperature_uncertainty,
    temperature_bound,
    vacuum_temperature_uncertainty,
)
from lossy_sensing.channel import evolve_fock_thermal
from lossy_sensing.fisher import state_fisher, uncertainty_from_fisher
from lossy_sensing.fockspace import ChannelParams, InputState, Parameter
from oracles import ThreeModeDilation, mp_purified_qfi, stationarity_residual

G, NT = Parameter.GAMMA, Parameter.THERMAL_OCCUPATION
ETAS = (0.3, 0.7, 0.9)


def test_zero_T_examples():
    assert damping_bound_zero_T(1, 0.8) == pytest.approx(1.2426, abs=1e-4)
    assert damping_bound_zero_T(4, 0.8) == pytest.approx(damping_bound_zero_T(1, 0.8) / 2, rel=1e-15)
    assert damping_bound_zero_T(1, 30) > 1e10
    assert is_divergent(damping_bound_zero_T(1, 400))
    assert damping_bound_zero_T(1, 0).reason.startswith("no action")
    assert is_divergent(damping_bound_zero_T(0, 0.5))


def test_divergent_value_behaves_like_inf():
    d = Divergent("because")
    assert d == math.inf and d > 1e300
    assert repr(d) == "Divergent('because')"
    again = pickle.loads(pickle.dumps(d))
    assert again.reason == "because"


@given(st.floats(0.1, 10), st.floats(0.01, 3))
def test_finite_T_reduces_to_zero_T(N, x):
    assert damping_bound_finite_T(N, ChannelParams(x, 0)) == pytest.approx(damping_bound_zero_T(N, x), rel=1e-14)


@given(st.floats(0.1, 10), st.floats(0.01, 3), st.floats(0, 10))
def test_ratio_identity(N, x, nT):
    params = ChannelParams(x, nT)
    ratio = damping_bound_finite_T(N, params) / damping_bound_zero_T(N, x)
    assert ratio == pytest.approx(purification_ratio(N, params), rel=1e-12)


def test_no_information_at_zero_input_and_zero_temperature():
    assert is_divergent(damping_bound_finite_T(0, ChannelParams(0.4, 0)))


@pytest.mark.parametrize("N,nT,eta", [(1, 2, 0.9), (1, 0.5, 0.3), (3, 1, 0.7), (0, 4, 0.5), (2.5, 0.1, 0.95)])
def test_purified_qfi_against_arbitrary_precision(N, nT, eta):
    params = ChannelParams.from_eta(eta, nT)
    for parameter in (G, NT):
        ref = float(mp_purified_qfi(parameter.value, N, params.x, nT))
        assert generator_qfi(parameter, N, params) == pytest.approx(ref, rel=1e-12)
    ref_g = float(mp_purified_qfi("gamma", N, params.x, nT))
    assert damping_bound_finite_T(N, params) == pytest.approx(1 / math.sqrt(ref_g) / params.x, rel=1e-12)
    ref_t = float(mp_purified_qfi("nt", N, params.x, nT))
    assert temperature_bound(N, params) == pytest.approx(1 / math.sqrt(ref_t), rel=1e-12)


@pytest.fixture(scope="module")
def dilation():
    return ThreeModeDilation(d=14)


@pytest.mark.parametrize("N,nT,eta", [(1, 0.5, 0.9), (1, 0.3, 0.7), (2, 0.2, 0.8), (0, 0.4, 0.6)])
def test_purified_qfi_against_explicit_three_mode_state(dilation, N, nT, eta):
    x = -0.5 * math.log(eta)
    params = ChannelParams(x, nT)
    fx = dilation.pure_state_qfi(lambda v: dilation.state(N, math.exp(-2 * v), nT), x)
    assert generator_qfi(G, N, params) == pytest.approx(fx, rel=1e-6)
    fn = dilation.pure_state_qfi(lambda v: dilation.state(N, eta, v), nT)
    assert generator_qfi(NT, N, params) == pytest.approx(fn, rel=1e-6)


@pytest.mark.parametrize("N,nT,eta", [(1, 0.5, 0.9), (2, 0.2, 0.5)])
def test_dilation_reproduces_channel_output(dilation, N, nT, eta):
    pops = dilation.system_populations(N, eta, nT)
    exact = evolve_fock_thermal(N, ChannelParams.from_eta(eta, nT), dilation.d).probs
    np.testing.assert_allclose(pops[:8], exact[:8], atol=1e-7)


@pytest.mark.parametrize("nT", [0.2, 1.0, 3.0])
@pytest.mark.parametrize("eta", ETAS)
def test_vacuum_bounds_equal_counting(nT, eta):
    params = ChannelParams.from_eta(eta, nT)
    fg = state_fisher(InputState.vacuum(), params, G)
    assert uncertainty_from_fisher(fg) / params.x == pytest.approx(damping_bound_finite_T(0, params), rel=1e-9)
    fn = state_fisher(InputState.vacuum(), params, NT)
    assert uncertainty_from_fisher(fn) == pytest.approx(temperature_bound(0, params), rel=1e-9)
    assert temperature_bound(0, params) == pytest.approx(vacuum_temperature_uncertainty(params), rel=1e-12)


def test_temperature_examples():
    assert vacuum_temperature_uncertainty(ChannelParams.from_eta(0.5, 1)) == pytest.approx(math.sqrt(3), rel=1e-15)
    assert temperature_bound(0, ChannelParams.from_eta(0.5, 1)) == pytest.approx(math.sqrt(3), rel=1e-14)
    assert temperature_bound(0, ChannelParams(40.0, 1)) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert steady_state_temperature_uncertainty(1) == pytest.approx(math.sqrt(2))
    assert is_divergent(temperature_bound(1, ChannelParams(0.3, 0)))
    assert is_divergent(temperature_bound(1, ChannelParams(0.0, 1)))


def test_sensitivity_examples():
    x = 0.6
    assert damping_sensitivity(1, 0, ChannelParams(x)) == pytest.approx(damping_bound_zero_T(1, x), rel=1e-14)
    params = ChannelParams(x, 0.5)
    assert damping_sensitivity(2, 0.5, params) > damping_sensitivity(2, 0, params)
    d = damping_sensitivity(1, 0, ChannelParams(0.3, 1))
    assert is_divergent(d) and "independent" in d.reason


@given(st.floats(0.1, 5), st.floats(0, 3), st.floats(0.01, 2), st.floats(0, 5))
def test_general_error_propagation_matches_damping_form(N, var, x, nT):
    params = ChannelParams(x, nT)
    a = damping_sensitivity(N, var, params)
    b = error_propagation(G, N, var, params)
    if is_divergent(a):
        assert is_divergent(b)
    else:
        assert b == pytest.approx(a, rel=1e-9)


def test_temperature_error_propagation_vacuum_matches_bound():
    for eta in ETAS:
        params = ChannelParams.from_eta(eta, 1.3)
        assert error_propagation(NT, 0, 0, params) == pytest.approx(temperature_bound(0, params), rel=1e-12)


def test_ordering_grid():
    for N in (1, 2):
        for nT in (0, 0.5, 1, 2):
            if N == nT:
                continue
            for eta in ETAS:
                params = ChannelParams.from_eta(eta, nT)
                sens = damping_sensitivity(N, 0, params)
                bound = damping_bound_finite_T(N, params)
                if nT == 0:
                    assert sens == pytest.approx(bound, rel=1e-10)
                else:
                    assert sens > bound * (1 + 1e-10)


@given(st.floats(0.2, 10), st.floats(0.01, 3), st.floats(1e-3, 10))
def test_ordering_property(N, x, nT):
    params = ChannelParams(x, nT)
    if abs(N - nT) < 1e-6:
        return
    assert damping_sensitivity(N, 0, params) >= damping_bound_finite_T(N, params) * (1 - 1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("nT", [0, 0.5, 2, 6])
@pytest.mark.parametrize("eta", ETAS)
def test_bounds_never_beat_exact_counting(m, nT, eta):
    params = ChannelParams.from_eta(eta, nT)
    exact_g = uncertainty_from_fisher(state_fisher(InputState.fock(m), params, G)) / params.x
    assert damping_bound_finite_T(m, params) <= exact_g * (1 + 1e-9)
    if nT > 0:
        exact_t = uncertainty_from_fisher(state_fisher(InputState.fock(m), params, NT))
        assert temperature_bound(m, params) <= exact_t * (1 + 1e-9)


def test_optimal_time():
    x_opt, bound = optimal_interaction_time(1)
    root = bisect(stationarity_residual, 0.5, 1.0, xtol=1e-14)
    assert x_opt == pytest.approx(root, abs=1e-6)
    assert round(x_opt, 2) == 0.80 and round(bound, 2) == 1.24
    x4, b4 = optimal_interaction_time(4)
    assert x4 == x_opt and b4 == pytest.approx(bound / 2, rel=1e-14)
    with pytest.raises(ValueError):
        optimal_interaction_time(0)


def test_zero_T_bound_is_convex_on_bracket():
    xs = np.linspace(0.01, 5, 400)
    f = np.array([damping_bound_zero_T(1, x) for x in xs])
    assert np.all(np.diff(f, 2) > 0)


def test_golden_section_on_known_minimum():
    assert golden_section_minimize(lambda v: (v - 1.234) ** 2, 0, 3, 1e-10) == pytest.approx(1.234, abs=1e-9)
