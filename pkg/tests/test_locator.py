import numpy as np
import pytest

from trscat.errors import LocalizationError
from trscat.locator import (
    FIXED_POINT, NEWTON, asymptotic_locations, cauchy_riemann_residual, fit_log_slope, locate_state,
    omega_radius, xi_data,
)
from trscat.scattering import RESONANCE, ZERO_REFLECTION, compute_rt


@pytest.fixture(scope="module")
def m6(fig1, fig1_eta):
    return fig1_eta.with_M(6.0), fig1.with_M(6.0)


def test_omega_radius():
    assert omega_radius(0.5, 4.0) == pytest.approx(np.exp(-2.0) / 16)


def test_newton_and_fixed_point_agree(m6):
    eta, p = m6
    a = locate_state(eta, p, ZERO_REFLECTION, NEWTON)
    b = locate_state(eta, p, ZERO_REFLECTION, FIXED_POINT)
    assert abs(a.z - b.z) < 1e-12 and abs(a.w - b.w) < 1e-10
    assert a.residual_norm < 1e-10 and b.residual_norm < 1e-10
    assert a.iterations < b.iterations
    # fixed-point steps contract
    s = np.array(b.steps[:-2])
    assert np.all(s[1:] < s[:-1])


def test_zero_reflection_kills_R(m6):
    eta, p = m6
    st = locate_state(eta, p)
    assert abs(st.reflection) < 1e-9
    assert abs(compute_rt(p, st.z).R) < 1e-9
    assert st.verification_residual < 1e-9


def test_resonance_is_an_outgoing_state(m6):
    eta, p = m6
    st = locate_state(eta, p, RESONANCE, check_ball=False)
    assert st.z.imag < 0 and st.residual_norm < 1e-10
    # a pole of T: |T| is huge next to it
    assert abs(compute_rt(p, st.z + 1e-7).T) > 1e3


def test_ball_check_rejects_far_roots(m6):
    eta, p = m6
    with pytest.raises(LocalizationError):
        locate_state(eta, p, ZERO_REFLECTION, radius=1e-9)


def test_xi_inverts_jacobian(m6):
    eta, p = m6
    xi = xi_data(eta, p)
    assert xi.inverse_defect < 1e-12
    # the identity-built Jacobian matches the variational one
    from trscat.scattering import jacobian

    J = jacobian(xi.bd, ZERO_REFLECTION)
    assert np.abs(J - xi.J).max() < 1e-8 * np.abs(J).max()


def test_asymptotic_forms_agree(m6):
    eta, p = m6
    a = asymptotic_locations(eta, p)
    assert a.split_defect < 1e-10
    st = locate_state(eta, p)
    assert abs(a.z_Y - st.z) < 0.1 * abs(st.z - eta.E)
    assert abs(a.w_Y - st.w) < 0.1 * abs(st.w - eta.w0)


def test_cauchy_riemann_on_analytic_function(m6):
    eta, p = m6
    st = locate_state(eta, p)
    res, grid = cauchy_riemann_residual(p, st.z, 1e-3)
    assert res < 1e-6 and len(grid) == 25


def test_fit_log_slope():
    xs = np.array([1.0, 2.0, 3.0])
    slope, icpt = fit_log_slope(xs, 3.0 * np.exp(-0.7 * xs))
    assert slope == pytest.approx(-0.7) and icpt == pytest.approx(np.log(3.0))


def test_report_fields(fig1_reports):
    r = fig1_reports[0]
    d = r.to_dict()
    assert d["M"] == 6.0 and d["bounds_asserted"] == (r.distance_quotient < 2)
    assert d["im_gap_actual"] == pytest.approx(r.z_Y.imag - r.z_X.imag)
    assert r.sup_R_on_gamma >= abs(r.R_center)


def test_determinant_grows_like_exp_2kM(fig1_reports, fig1_eta):
    slope, _ = fit_log_slope([r.M for r in fig1_reports], [r.N_eta for r in fig1_reports])
    assert slope >= 0.8 * 2 * fig1_eta.k
