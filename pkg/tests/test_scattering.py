import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import square_well_rt
from trscat.boundstate import NONNODAL
from trscat.errors import DomainError
from trscat.potential import CosineDefect, Sampled, SquareWell, TruncatedPotential, figure1_potential
from trscat.propagate import Zeta, integrate_fundamentals
from trscat.scattering import (
    RESONANCE, ZERO_REFLECTION, compute_rt, half_max_width, jacobian, local_maxima, peak_table,
    principal_sqrt, reflection_from_theta, scan_rt, theta_map,
)

FIG1 = figure1_potential(M=6.0)

defect_potentials = st.builds(
    lambda c0, a, b, M: TruncatedPotential(
        CosineDefect(c0=c0, cos_terms=((a, 2.0),), defect_amplitude=b, defect_frequency=1.0, rho_override=3.0), M),
    st.floats(0.0, 12.0), st.floats(0.0, 6.0), st.floats(0.0, 6.0), st.floats(3.5, 8.0),
)


def test_branch_cut_rejected():
    for z in (0.0, -2.0, -1e-3):
        with pytest.raises(DomainError):
            principal_sqrt(z)
    assert principal_sqrt(-2.0 - 1e-300j).imag < 0


def test_compute_rt_needs_positive_real_part():
    with pytest.raises(DomainError):
        compute_rt(FIG1, -1.0 + 0.5j)


@settings(max_examples=200, deadline=None)
@given(defect_potentials, st.floats(0.5, 60.0))
def test_flux_conservation(p, E):
    assert compute_rt(p, E).flux_defect < 1e-8


def test_flux_for_sampled_potential():
    x = np.linspace(-4, 4, 161)
    p = TruncatedPotential(Sampled(h=0.05, values=tuple(3 * np.exp(-x * x)), rho_override=3.9), 4.0)
    for E in (0.4, 2.0, 9.0):
        assert compute_rt(p, E).flux_defect < 1e-8


@pytest.mark.parametrize("depth, a", [(3.0, 1.5), (20.0, 0.7), (0.5, 4.0)])
@pytest.mark.parametrize("z", [0.3, 2.0, 17.0, 5.0 - 0.4j, 2.0 + 0.3j])
def test_square_well_closed_form(depth, a, z):
    c = compute_rt(TruncatedPotential(SquareWell(depth=depth), a), z)
    R, T = square_well_rt(z, depth, a)
    assert abs(c.R - R) < 1e-8 * max(1, abs(R))
    assert abs(c.T - T) < 1e-8 * max(1, abs(T))


@settings(max_examples=20, deadline=None)
@given(defect_potentials, st.floats(2.0, 40.0), st.floats(-0.3, 0.3))
def test_dR_matches_difference_quotient(p, re, im):
    z = complex(re, im)
    c = compute_rt(p, z, derivative=True)
    from trscat import _kernels as K, ode

    k = cmath.sqrt(z)
    ek = cmath.exp(1j * k * p.M)
    mesh = ode.integrate(K.SYS_PLAIN, p.inner.program(), np.array([ek, 1j * k * ek]), p.M, -p.M, z).xs
    h = 1e-5
    d = (compute_rt(p, z + h, mesh=mesh).R - compute_rt(p, z - h, mesh=mesh).R) / (2 * h)
    assert abs(d - c.dR) < 1e-6 * max(1, abs(c.dR))


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(12.0, 28.0), st.floats(-0.05, 0.05))
def test_reflection_routes_agree(w, re, im):
    z = complex(re, im)
    c = compute_rt(FIG1, z)
    R, _ = reflection_from_theta(integrate_fundamentals(FIG1, Zeta(w, z), NONNODAL))
    assert abs(R - c.R) < 1e-8 * max(abs(c.R), abs(c.T))


def test_theta_jacobian_matches_differences():
    zeta = Zeta(-3.2 + 0.01j, 19.8 + 0.001j)
    bd = integrate_fundamentals(FIG1, zeta, NONNODAL)
    for mode in (ZERO_REFLECTION, RESONANCE):
        J = jacobian(bd, mode)
        h = 1e-6
        for col, step in enumerate((Zeta(h, 0), Zeta(0, h))):
            hi = integrate_fundamentals(FIG1, Zeta(zeta.w + step.w, zeta.z + step.z), NONNODAL, meshes=bd.meshes)
            lo = integrate_fundamentals(FIG1, Zeta(zeta.w - step.w, zeta.z - step.z), NONNODAL, meshes=bd.meshes)
            fd = (theta_map(hi, mode).as_array() - theta_map(lo, mode).as_array()) / (2 * h)
            assert np.abs(fd - J[:, col]).max() < 1e-6 * np.abs(J).max()


def test_scan_and_peaks():
    p = TruncatedPotential(SquareWell(depth=3.0), 1.5)
    t = scan_rt(p, 0.5, 12.0, 200, refine=True)
    assert np.all(np.diff(t.E) > 0) and t.E.size > 200
    peaks = peak_table(p, t)
    assert peaks and all(abs(T2 - 1) < 1e-8 and R2 < 1e-8 for _, T2, R2 in peaks)
    # perfect transmission where 2qa is a multiple of pi
    for E, _, _ in peaks:
        n = 2 * np.sqrt(E + 3.0) * 1.5 / np.pi
        assert abs(n - round(n)) < 1e-6


def test_scan_threads_match_serial():
    a = scan_rt(FIG1, 15.0, 25.0, 40)
    b = scan_rt(FIG1, 15.0, 25.0, 40, threads=3)
    assert np.array_equal(a.R, b.R) and np.array_equal(a.T, b.T)


def test_scan_validates_range():
    with pytest.raises(DomainError):
        scan_rt(FIG1, 5.0, 4.0, 10)
    with pytest.raises(DomainError):
        scan_rt(FIG1, 1.0, 4.0, 1)


def test_local_maxima():
    assert local_maxima([0, 1, 0, 2, 2, 1, 3]) == [1, 4]


def test_half_max_width_edges_sit_at_half_height():
    from scipy.optimize import brentq

    from trscat.scattering import transmission

    # barrier of height 40: first above-barrier resonance at 40 + (pi/2)^2
    p = TruncatedPotential(SquareWell(depth=-40.0), 1.0)
    E = peak_table(p, scan_rt(p, 40.5, 46.0, 100))[0][0]
    assert E == pytest.approx(40 + np.pi**2 / 4, rel=1e-7)  # maximizing by value: sqrt(eps) floor
    width = half_max_width(p, E)
    top = transmission(p, E)
    left = brentq(lambda e: transmission(p, e) - top / 2, 40.01, E)
    right = brentq(lambda e: transmission(p, e) - top / 2, E, 45.0)
    assert width == pytest.approx(right - left, rel=1e-9)
