import numpy as np
import pytest

from oracles import square_well_rt
from trscat.errors import DomainError
from trscat.fdoracle import build_problem, lattice_wavenumber, oracle_peak, oracle_rt, oracle_scan, solve_problem
from trscat.potential import SquareWell, TruncatedPotential, figure1_potential
from trscat.scattering import compute_rt, peak_table, scan_rt

WELL = TruncatedPotential(SquareWell(depth=3.0), 1.5)


def test_lattice_dispersion():
    h, z = 0.01, 7.3
    kappa = lattice_wavenumber(z, h).real
    assert 2 - 2 * np.cos(kappa * h) == pytest.approx(z * h * h, rel=1e-12)


def test_grid_has_nodes_on_truncation_edges():
    prob = build_problem(figure1_potential(M=6.0), h=0.003)
    assert np.any(np.isclose(prob.x, 6.0, atol=1e-12)) and np.any(np.isclose(prob.x, -6.0, atol=1e-12))
    assert np.all(prob.V[np.abs(prob.x) > 6.0 + 1e-9] == 0)


@pytest.mark.parametrize("z", [0.3, 2.0, 7.5, 20.0])
def test_square_well_oracle(z):
    c = oracle_rt(WELL, z, h=1e-3)
    R, T = square_well_rt(z, 3.0, 1.5)
    assert abs(c.R - R) < 1e-4 and abs(c.T - T) < 1e-4
    assert c.flux_defect < 1e-10


def test_second_order_in_h():
    p = figure1_potential(M=6.0)
    ref = compute_rt(p, 17.3).T
    e1 = abs(oracle_rt(p, 17.3, h=4e-3).T - ref)
    e2 = abs(oracle_rt(p, 17.3, h=2e-3).T - ref)
    assert 3.5 < e1 / e2 < 4.5


def test_padding_does_not_matter():
    a = oracle_rt(WELL, 2.0, h=1e-3)
    b = oracle_rt(WELL, 2.0, h=1e-3, L=4.0)
    assert abs(a.R - b.R) < 1e-9 and abs(a.T - b.T) < 1e-9


def test_preconditions():
    prob = build_problem(WELL, h=0.01)
    with pytest.raises(DomainError):
        solve_problem(prob, 0.0)
    with pytest.raises(DomainError):
        solve_problem(prob, 200.0)  # h sqrt(z) >= 0.1
    with pytest.raises(DomainError):
        build_problem(WELL, h=0.01, L=1.0)


def test_scan_threads_and_peak():
    p = figure1_potential(M=6.0)
    a = oracle_scan(p, 19.0, 20.5, 30, h=2e-3)
    b = oracle_scan(p, 19.0, 20.5, 30, h=2e-3, threads=2)
    assert np.array_equal(a.T, b.T)
    ode_peak = peak_table(p, scan_rt(p, 19.0, 20.5, 60))[0][0]
    assert abs(oracle_peak(p, ode_peak - 0.05, ode_peak + 0.05, h=2e-3) - ode_peak) < 1e-3
