import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trscat.boundstate import (
    NODAL, NONNODAL, EtaData, bound_state, eta_data, fit_decay_rates, select_defect_state,
    solve_dirichlet_spectrum,
)
from trscat.errors import DecayFitError, DomainError, LocalizationError
from trscat.potential import HarmonicOffset, figure1_potential, harmonic_potential
from trscat.propagate import Zeta, integrate_fundamentals


def test_harmonic_levels():
    s = solve_dirichlet_spectrum(HarmonicOffset(c0=0.0), L=8.0, h=0.01, window=(0.0, 6.5))
    assert np.allclose(s.energies, [1.0, 3.0, 5.0], atol=2e-4)
    assert s.vectors[0, 0] == 0 and s.vectors[-1, 0] == 0


def test_second_order_convergence():
    errs = [abs(solve_dirichlet_spectrum(HarmonicOffset(c0=0.0), 8.0, h, (0, 2)).energies[0] - 1.0)
            for h in (0.04, 0.02)]
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_extended_states_are_rejected():
    s = solve_dirichlet_spectrum(figure1_potential().inner, 12.0, 0.01, window=(5.0, 9.0))
    with pytest.raises(LocalizationError):
        select_defect_state(s, (5.0, 9.0), 3.0)


def test_empty_window():
    s = solve_dirichlet_spectrum(HarmonicOffset(c0=0.0), 6.0, 0.02, window=(0.0, 2.0))
    with pytest.raises(LocalizationError):
        select_defect_state(s, (1.5, 2.5), 0.0)
    with pytest.raises(DomainError):
        select_defect_state(s, (2.0, 1.0), 0.0)


def test_domain_must_contain_truncation():
    with pytest.raises(DomainError):
        solve_dirichlet_spectrum(harmonic_potential(4.0), 3.0, 0.01)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 1.5), st.floats(0.2, 1.5), st.floats(0.0, 0.9))
def test_decay_fit_recovers_rates(k_left, k_right, ripple):
    x = np.linspace(-14, 14, 5601)
    rate = np.where(x < 0, k_left, k_right)
    phi = np.exp(-rate * np.abs(x)) * (1.0 + ripple * np.cos(2 * np.pi * x))
    km, kp, _ = fit_decay_rates(x, phi, M=12.0, rho=2.0)
    assert km == pytest.approx(k_left, rel=1e-6)
    assert kp == pytest.approx(k_right, rel=1e-6)


def test_decay_fit_needs_room():
    x = np.linspace(-5, 5, 101)
    with pytest.raises(DecayFitError):
        fit_decay_rates(x, np.exp(-np.abs(x)), M=4.0, rho=3.0)


def test_normalization_cases():
    x = np.linspace(-6, 6, 1201)
    even = eta_data(1.0, x, 3.0 * np.exp(-x * x / 2), M=5.0, rho=0.0)
    assert even.case == NONNODAL and even.phi[600] == pytest.approx(1.0)
    odd = eta_data(3.0, x, -2.0 * x * np.exp(-x * x / 2), M=5.0, rho=0.0)
    assert odd.case == NODAL and odd.w0 == 0.0
    assert (odd.phi[601] - odd.phi[599]) / 0.02 == pytest.approx(1.0, rel=1e-4)


def test_fig1_refined_state(fig1, fig1_eta):
    eta = fig1_eta
    assert abs(eta.extras["fd_E"] - 19.77) < 0.05
    assert eta.extras["mass_fraction"] > 0.9
    assert eta.case == NONNODAL
    assert 0.3 < eta.k < 0.45
    # the refined pair must be an actual solution: u at (w0, E) reproduces phi at the edges
    bd = integrate_fundamentals(fig1, Zeta(eta.w0, eta.E), eta.case)
    for side, val in ((1, bd.plus.u), (-1, bd.minus.u)):
        i = int(np.argmin(np.abs(eta.x - side * fig1.M)))
        assert abs(val.imag) < 1e-12
        assert val.real == pytest.approx(eta.phi[i], rel=1e-5)


def test_eta_serialization_roundtrip(fig1_eta):
    back = EtaData.from_dict(__import__("json").loads(fig1_eta.dumps()))
    assert back.E == fig1_eta.E and back.w0 == fig1_eta.w0 and back.k == fig1_eta.k
    assert np.array_equal(back.phi, fig1_eta.phi)


def test_with_M_refits(fig1_eta):
    e6 = fig1_eta.with_M(6.0)
    assert e6.M == 6.0 and e6.E == fig1_eta.E
    assert e6.k == pytest.approx(fig1_eta.k, rel=0.05)


def test_unrefined_pipeline():
    eta = bound_state(figure1_potential(), (18.0, 21.0), L=12.0, h=0.005, refine=False)
    assert abs(eta.E - 19.77) < 0.05 and not eta.extras["refined"]
