import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dimerfuel.cavity import (
    CavityParams,
    below_threshold,
    bose_occupation,
    carnot_bound,
    coefficients,
    evolve_master,
    extract_temperature,
    heating_condition,
    mean_photons,
    numeric_steady_state,
    photon_number_trajectory,
    steady_temperature,
    summary_of,
)
from dimerfuel.dimer import psi_minus, psi_plus, rho_mix
from dimerfuel.errors import AboveThresholdError, TruncationError
from dimerfuel.qstate import FockSpace


def params(kappa=0.5, n_env=0.0, mu=1.0):
    return CavityParams(mu=mu, kappa=kappa, n_env=n_env)


@st.composite
def pumped_cavities(draw):
    delta = draw(st.floats(-2.0, 2.0))
    C = draw(st.floats(-1.0, 1.0)) * (1 - abs(delta) / 2)
    kappa = draw(st.floats(0.05, 5.0))
    n_env = draw(st.floats(0.001, 10.0))
    return summary_of(delta, C), params(kappa, n_env)


@pytest.mark.parametrize(
    "delta, C, rp, rm", [(0, 1, 2, 2), (0, -1, 0, 0), (2, 0, 2, 0)]
)
def test_coefficients(delta, C, rp, rm):
    r = coefficients(summary_of(delta, C))
    assert (r.r_plus, r.r_minus) == (rp, rm)


def test_coefficients_from_state_match_matrix_elements():
    for s in (psi_plus(), psi_minus(), rho_mix()):
        r = coefficients(s)
        # r_+ = 2 p11 + p22 + p33 + 2 Re c23, r_- = 2 p44 + p22 + p33 + 2 Re c23
        assert r.r_plus == pytest.approx(2 * s.p11 + s.p22 + s.p33 + 2 * s.c23.real)
        assert r.r_minus == pytest.approx(2 * s.p44 + s.p22 + s.p33 + 2 * s.c23.real)


@pytest.mark.parametrize(
    "delta, kappa, expected", [(0, 0.5, True), (2, 0.5, False), (0.9, 0.25, False)]
)
def test_below_threshold(delta, kappa, expected):
    assert below_threshold(summary_of(delta, 0.0), params(kappa)) is expected
    # independent of the coherence
    assert below_threshold(summary_of(delta, 0.0 if abs(delta) == 2 else 0.05), params(kappa)) is expected


@pytest.mark.parametrize("n_env", [0.05, 0.6, 3.0])
def test_dark_state_gives_environment_temperature(n_env):
    rep = steady_temperature(summary_of(0, -1), params(0.8, n_env))
    assert rep.boltzmann_x == pytest.approx(n_env / (n_env + 1), rel=1e-15)
    assert rep.temperature_ratio == pytest.approx(1.0, abs=1e-12)


def test_steady_temperature_values():
    mix = steady_temperature(summary_of(0, 0), params(0.5, 0.6))
    plus = steady_temperature(summary_of(0, 1), params(0.5, 0.6))
    assert mix.boltzmann_x == pytest.approx(1.6 / 2.6, rel=1e-15)
    assert plus.boltzmann_x == pytest.approx(2.6 / 3.6, rel=1e-15)
    assert carnot_bound(mix.temperature_ratio) == pytest.approx(0.505, abs=1e-3)
    assert carnot_bound(plus.temperature_ratio) == pytest.approx(0.668, abs=1e-3)
    for rep in (mix, plus):
        x = rep.boltzmann_x
        assert rep.mean_photons == pytest.approx(x / (1 - x), rel=1e-12)
        assert rep.relaxation_rate == 1.0


def test_zero_temperature_environment_reports_absolute_temperature():
    rep = steady_temperature(summary_of(0, 0), params(0.5, 0.0))
    assert rep.temperature_ratio is None
    assert rep.boltzmann_x == 0.5
    assert rep.temperature == pytest.approx(1 / math.log(2))


def test_above_threshold_raises():
    with pytest.raises(AboveThresholdError):
        steady_temperature(summary_of(1.5, 0.0), params(0.5, 0.1))
    with pytest.raises(AboveThresholdError):
        steady_temperature(summary_of(1.0, 0.0), params(0.5, 0.1))


def test_zero_pump_gives_environment():
    rep = steady_temperature(summary_of(2.0, 0.0), params(0.5, 0.7, mu=0.0))
    assert rep.temperature_ratio == pytest.approx(1.0)


@pytest.mark.parametrize(
    "delta, C, n_env, expected",
    [(0, 0.5, 0.3, True), (0, 0.5, 4.0, True), (0, -1, 0.3, False), (1, -0.5, 0.05, True)],
)
def test_heating_condition(delta, C, n_env, expected):
    assert heating_condition(summary_of(delta, C), params(0.5, n_env)) is expected


def test_heating_example_against_temperature():
    # delta = 1 needs kappa > mu/2 to stay below threshold
    rep = steady_temperature(summary_of(1, -0.5), params(0.6, 0.05))
    assert rep.temperature_ratio > 1


@given(pumped_cavities())
@settings(max_examples=300)
def test_threshold_consistency(case):
    s, p = case
    if below_threshold(s, p):
        steady_temperature(s, p)
    else:
        with pytest.raises(AboveThresholdError):
            steady_temperature(s, p)


@given(pumped_cavities())
@settings(max_examples=300)
def test_heating_condition_matches_temperature_ratio(case):
    s, p = case
    assume(below_threshold(s, p))
    ratio = steady_temperature(s, p).temperature_ratio
    # keep clear of the boundary where round-off decides
    assume(abs(ratio - 1) > 1e-9)
    assert heating_condition(s, p) == (ratio > 1)


@given(st.floats(-1.99, 0.9), st.floats(0.01, 5))
def test_steady_photons_increase_with_coherence(delta, n_env):
    bound = 1 - abs(delta) / 2
    Cs = np.linspace(-bound, bound, 7)
    n = [steady_temperature(summary_of(delta, C), params(0.5, n_env)).mean_photons for C in Cs]
    assert all(b > a for a, b in zip(n, n[1:]))


@pytest.mark.parametrize("n_env", [0.05, 0.5, 1, 5])
def test_bell_state_temperature_ordering(n_env):
    p = params(0.5, n_env)
    t_plus, t_mix, t_minus = (steady_temperature(summary_of(0, C), p).temperature_ratio for C in (1, 0, -1))
    assert t_plus > t_mix > t_minus
    assert t_minus == pytest.approx(1, abs=1e-12)


def test_carnot_bound():
    assert carnot_bound(2.0) == 0.5
    assert carnot_bound(1e300) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        carnot_bound(1.0)


def test_photon_trajectory_closed_form():
    s, p = summary_of(0.2, 0.3), params(0.5, 0.2)
    n_ss = steady_temperature(s, p).mean_photons
    assert photon_number_trajectory(0.7, s, p, 0.0) == 0.7
    assert photon_number_trajectory(0.7, s, p, 200.0) == pytest.approx(n_ss, rel=1e-12)
    t = 1.3
    assert photon_number_trajectory(0.0, s, p, t) == pytest.approx(n_ss * (1 - math.exp(-(1 - 0.2) * t)))


def test_negative_inversion_speeds_up_thermalization():
    s, p = summary_of(-2, 0), params(0.5, 0.1)
    assert steady_temperature(s, p).relaxation_rate == pytest.approx(3.0)


def test_photon_trajectory_flags_growth_above_threshold():
    with pytest.warns(RuntimeWarning):
        n = photon_number_trajectory(1.0, summary_of(1.5, 0), params(0.5, 0.0), 2.0)
    assert n > 1.0


def test_damped_cavity_decays_at_twice_kappa():
    F = FockSpace(12)
    p = params(kappa=0.3, n_env=0.0, mu=0.0)
    for t in (0.5, 2.0):
        rho = evolve_master(F.projector(1), summary_of(0, 0), p, t)
        assert rho.populations[1] == pytest.approx(math.exp(-2 * 0.3 * t), rel=1e-9)
        assert np.trace(rho.matrix).real == pytest.approx(1, abs=1e-10)


def test_evolution_preserves_trace_and_positivity_for_coherent_input():
    psi = np.zeros(80, complex)
    psi[:3] = [0.6, 0.64j, 0.48]
    rho0 = np.outer(psi, psi.conj())
    rho = evolve_master(rho0, summary_of(0.3, 0.2), params(0.6, 0.1), 1.5)
    assert abs(np.trace(rho.matrix) - 1) < 1e-10
    assert np.linalg.eigvalsh(rho.matrix)[0] > -1e-8


def test_numeric_steady_state_mixed_beam_zero_temperature():
    rho = numeric_steady_state(summary_of(0, 0), params(0.5, 0.0))
    x, dev = extract_temperature(rho)
    assert abs(x - 0.5) < 1e-6 and dev < 1e-6
    assert abs(mean_photons(rho) - 1.0) < 1e-6


def test_numeric_steady_state_bell_beam_doubles_fock_space():
    s, p = summary_of(0, 1), params(0.5, 0.0)
    with pytest.raises(TruncationError):
        evolve_master(FockSpace(40).projector(0), s, p, 60.0)
    rho = numeric_steady_state(s, p, fock_dim=40)
    assert rho.dim == 80
    assert abs(mean_photons(rho) - 2.0) < 1e-6


def test_extract_temperature_examples():
    x, dev = extract_temperature(FockSpace(40).thermal(0.5))
    assert abs(x - 0.5) < 1e-12 and dev < 1e-12
    assert extract_temperature(FockSpace(10).projector(0)) == (0.0, 0.0)
    with pytest.raises(ValueError):
        extract_temperature(np.full((3, 3), 1 / 3))


def test_extract_temperature_of_numeric_steady_state():
    s, p = summary_of(0, 1), params(0.5, 0.05)
    rho = numeric_steady_state(s, p)
    x, dev = extract_temperature(rho)
    assert abs(x - steady_temperature(s, p).boltzmann_x) < 1e-6
    assert dev < 1e-6


def test_photon_trajectory_agrees_with_master_equation():
    rng = np.random.default_rng(5)
    for _ in range(3):
        delta = rng.uniform(-1.5, 0.4)
        C = rng.uniform(-1, 1) * (1 - abs(delta) / 2)
        s, p = summary_of(delta, C), params(rng.uniform(0.4, 1.0), rng.uniform(0.0, 0.5))
        times = np.linspace(0.2, 4.0, 5)
        states = evolve_master(FockSpace(80).projector(0), s, p, times[-1], t_eval=times)
        for t, rho in zip(times, states):
            assert abs(mean_photons(rho) - photon_number_trajectory(0.0, s, p, t)) < 1e-6


def test_bose_occupation():
    assert bose_occupation(0.0) == 0.0
    assert bose_occupation(1 / math.log(2)) == pytest.approx(1.0)
    p = CavityParams.from_temperature(1.0, 0.5, T_env=0.7)
    assert p.T_env == pytest.approx(0.7)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert bose_occupation(0.05) == pytest.approx(math.exp(-20), rel=1e-8)
