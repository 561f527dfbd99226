import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trscat.boundstate import NODAL, NONNODAL
from trscat.errors import DomainError
from trscat.potential import figure1_potential, harmonic_potential
from trscat.propagate import (
    Zeta, dump_trajectory, identity_residuals, initial_conditions, integrate_fundamentals,
    variational_check, wronskian_defect,
)

P = figure1_potential(M=6.0)

zetas = st.builds(
    Zeta,
    st.complex_numbers(max_magnitude=4.0, allow_nan=False, allow_infinity=False),
    # energies around the gap state; deep in a gap the solutions grow like exp(3M)
    # and the conserved quantities drown in cancellation
    st.builds(complex, st.floats(12.0, 30.0), st.floats(-0.5, 0.5)),
)
cases = st.sampled_from([NONNODAL, NODAL])


@pytest.mark.parametrize("case", [NONNODAL, NODAL])
def test_initial_wronskian_is_one(case):
    for w in (0.0, 0.7 - 0.2j, -3.0):
        y = initial_conditions(case, w)
        assert abs(y[0] * y[3] - y[1] * y[2] - 1) < 1e-15


def test_singular_normalization():
    with pytest.raises(DomainError):
        initial_conditions(NONNODAL, 1j)


@settings(max_examples=25, deadline=None)
@given(zetas, cases)
def test_wronskian_conserved(zeta, case):
    if abs(1 + zeta.w**2) < 0.05:
        return
    bd = integrate_fundamentals(P, zeta, case, keep=True)
    size = max(float(np.abs(tr.ys[:, 0] * tr.ys[:, 3]).max()) for tr in bd.trajectories)
    assert wronskian_defect(bd) < 1e-8 * max(1.0, size)


def test_wronskian_at_gap_state(fig1, fig1_eta):
    bd = integrate_fundamentals(fig1, Zeta(fig1_eta.w0, fig1_eta.E), fig1_eta.case, keep=True)
    assert wronskian_defect(bd) < 1e-8


@settings(max_examples=25, deadline=None)
@given(zetas, cases)
def test_derivative_identities(zeta, case):
    if abs(1 + zeta.w**2) < 0.05:
        return
    res = identity_residuals(integrate_fundamentals(P, zeta, case))
    assert res["dz"] < 1e-8 and res["dw"] < 1e-8


@settings(max_examples=10, deadline=None)
@given(zetas, cases)
def test_variational_matches_differences(zeta, case):
    if abs(1 + zeta.w**2) < 0.05:
        return
    assert variational_check(P, zeta, case, delta=1e-5)["max"] < 1e-6


def test_int_u2_matches_quadrature():
    p = harmonic_potential(3.0, c0=0.0)
    bd = integrate_fundamentals(p, Zeta(0.0, 1.0), NONNODAL)
    x = np.linspace(-3, 3, 60001)
    assert bd.int_u2.real == pytest.approx(np.trapezoid(np.exp(-x * x), x), rel=1e-9)


def test_second_order_components():
    z0, dz = 12.0 + 0.1j, 1e-5
    bd = integrate_fundamentals(P, Zeta(0.3, z0), NONNODAL, second_order=True)
    hi = integrate_fundamentals(P, Zeta(0.3, z0 + dz), NONNODAL, meshes=bd.meshes)
    lo = integrate_fundamentals(P, Zeta(0.3, z0 - dz), NONNODAL, meshes=bd.meshes)
    fd = (hi.plus.dzu - lo.plus.dzu) / (2 * dz)
    assert abs(fd - bd.plus.dz2u) < 1e-6 * abs(bd.plus.dz2u)


def test_dump_trajectory(tmp_path):
    bd = integrate_fundamentals(P, Zeta(0.0, 15.0), NONNODAL, keep=True)
    path = tmp_path / "traj.csv"
    dump_trajectory(bd, path)
    rows = list(csv.reader(open(path)))
    assert rows[0][:3] == ["x", "re_u", "im_u"]
    xs = np.array([float(r[0]) for r in rows[1:]])
    assert xs[0] == -6.0 and xs[-1] == 6.0 and np.all(np.diff(xs) > 0)
    i0 = int(np.argmin(np.abs(xs)))
    assert float(rows[1 + i0][1]) == 1.0
