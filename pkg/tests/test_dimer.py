import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dimerfuel.dimer import (
    DimerState,
    excited,
    ground,
    is_entangled,
    make_dimer,
    max_coherence,
    maximally_heating_state,
    min_pt_eigenvalue,
    partial_transpose,
    psi_plus,
    rho_mix,
    summarize,
)
from dimerfuel.errors import InvalidStateError


@st.composite
def dimer_states(draw):
    w = [draw(st.floats(0.0, 1.0)) for _ in range(4)]
    total = sum(w)
    if total == 0:
        w, total = [1.0, 0, 0, 0], 1.0
    p = [x / total for x in w]
    p[3] = 1.0 - p[0] - p[1] - p[2]
    p[3] = max(p[3], 0.0)
    frac = draw(st.floats(0.0, 1.0))
    phase = draw(st.floats(0.0, 2 * np.pi))
    c = frac * np.sqrt(p[1] * p[2]) * np.exp(1j * phase)
    return make_dimer(*p, c)


def test_bell_and_mixed_states():
    s = make_dimer(0, 0.5, 0.5, 0, 0.5)
    psi = np.array([0, 1, 1, 0]) / np.sqrt(2)
    np.testing.assert_allclose(s.matrix(), np.outer(psi, psi), atol=1e-15)
    np.testing.assert_allclose(make_dimer(0, 0.5, 0.5, 0, 0).matrix(), np.diag([0, 0.5, 0.5, 0]))


@pytest.mark.parametrize(
    "args",
    [(0, 0.5, 0.5, 0, 0.6), (0.5, 0.5, 0.5, 0, 0), (-0.1, 0.6, 0.5, 0, 0), (0, 0.5, 0.5, 0, np.nan)],
)
def test_make_dimer_rejects(args):
    with pytest.raises(InvalidStateError):
        make_dimer(*args)


@pytest.mark.parametrize(
    "state, delta, C, E",
    [(psi_plus(), 0, 1, 1), (excited(), 2, 0, 2), (ground(), -2, 0, 0)],
)
def test_summarize(state, delta, C, E):
    s = summarize(state)
    assert (s.delta, s.coherence_C, s.energy) == pytest.approx((delta, C, E), abs=1e-15)


def test_energy_is_expectation_of_atomic_hamiltonian():
    s = make_dimer(0.1, 0.3, 0.2, 0.4, 0.1)
    H = np.diag([2, 1, 1, 0])
    assert summarize(s).energy == pytest.approx(np.trace(H @ s.matrix()).real, abs=1e-15)


def test_entanglement_examples():
    assert is_entangled(psi_plus())
    assert not is_entangled(rho_mix())
    boundary = make_dimer(0.25, 0.25, 0.25, 0.25, 0.25)
    assert not is_entangled(boundary)
    assert abs(min_pt_eigenvalue(boundary)) < 1e-12


def test_partial_transpose_of_product_is_product():
    a = np.array([[0.7, 0.1], [0.1, 0.3]])
    b = np.array([[0.4, 0.2j], [-0.2j, 0.6]])
    np.testing.assert_allclose(partial_transpose(np.kron(a, b)), np.kron(a, b.T))


@pytest.mark.parametrize("delta, expected", [(0, 1), (2, 0), (1, 0.5), (-1, 0.5)])
def test_max_coherence(delta, expected):
    assert max_coherence(delta) == expected


def test_max_coherence_out_of_range():
    with pytest.raises(ValueError):
        max_coherence(2.1)


def test_maximally_heating_examples():
    s = maximally_heating_state(0.0, 0.0)
    assert s == make_dimer(0, 0.5, 0.5, 0, 0.5)
    s = maximally_heating_state(1.0, 0.0)
    assert (s.p11, s.c23, s.p44) == pytest.approx((0.5, 0.25, 0.0))
    assert is_entangled(s) and min_pt_eigenvalue(s) < -1e-3
    s = maximally_heating_state(-1.0, 0.5)
    assert (s.p11, s.c23, s.p44) == pytest.approx((0.0, 0.25, 0.5))
    assert is_entangled(s) and min_pt_eigenvalue(s) < -1e-3


@pytest.mark.parametrize("delta, p44", [(0.5, 0.1), (-1.0, 0.2), (2.0, 0.0), (-2.0, 1.0)])
def test_maximally_heating_rejects_inconsistent(delta, p44):
    with pytest.raises(ValueError):
        maximally_heating_state(delta, p44)


@given(dimer_states())
@settings(max_examples=500)
def test_coherence_bound_implied_by_validity(s):
    summ = summarize(s)
    assert abs(summ.coherence_C) <= 1 - abs(summ.delta) / 2 + 1e-12
    assert summ.energy == pytest.approx(1 + summ.delta / 2, abs=1e-15)


def test_coherence_bound_ten_thousand_states():
    rng = np.random.default_rng(11)
    p = rng.dirichlet(np.ones(4), size=10_000)
    c = np.sqrt(p[:, 1] * p[:, 2]) * rng.uniform(-1, 1, 10_000)
    C = 2 * c
    delta = 2 * (p[:, 0] - p[:, 3])
    assert np.all(np.abs(C) <= 1 - np.abs(delta) / 2 + 1e-12)


@given(dimer_states())
@settings(max_examples=500)
def test_ppt_dual_path_agrees(s):
    lam = min_pt_eigenvalue(s)
    if abs(lam) > 1e-10:
        assert is_entangled(s) == (lam < 0)


@given(st.floats(-1.999, 1.999))
def test_maximally_heating_state_is_entangled(delta):
    s = maximally_heating_state(delta)
    assert summarize(s).coherence_C == pytest.approx(max_coherence(delta), abs=1e-14)
    assert summarize(s).delta == pytest.approx(delta, abs=1e-14)
    assert is_entangled(s)


def test_from_matrix_rejects_non_x_structure():
    rho = psi_plus().matrix()
    rho[0, 3] = rho[3, 0] = 0.01
    with pytest.raises(InvalidStateError):
        DimerState.from_matrix(rho)
