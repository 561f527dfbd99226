"""Finite-difference scattering solver used to cross-check the ODE route.

The three-point Laplacian on a uniform grid is closed by two-point radiation
rows built from the lattice plane waves ``exp(+-i kappa x)`` with
``2 - 2 cos(kappa h) = z h^2``, so the free region carries no boundary error.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, solve_banded
from scipy.optimize import minimize_scalar

from .errors import DomainError
from .scattering import ScanTable, ScatteringCoefficients

DEFAULT_H = 1e-3
PAD_NODES = 5


@dataclass(frozen=True)
class DiscreteScatteringProblem:
    h: float
    x: np.ndarray
    V: np.ndarray
    M: float

    @property
    def L(self):
        return float(self.x[-1])


def build_problem(p, h=DEFAULT_H, L=None):
    """Grid with nodes on ``+-M``; the potential takes its one-sided average at the jumps."""
    n_M = max(1, int(round(p.M / h)))
    h = p.M / n_M
    pad = PAD_NODES if L is None else max(1, int(math.ceil((L - p.M) / h)))
    if L is not None and L < p.M:
        raise DomainError("oracle domain must contain [-M, M]")
    j = np.arange(-(n_M + pad), n_M + pad + 1)
    x = j * h
    V = np.where(np.abs(j) < n_M, p.inner(x), 0.0)
    edge = np.abs(j) == n_M
    V[edge] = 0.5 * p.inner(x[edge])
    return DiscreteScatteringProblem(h=h, x=x, V=V, M=p.M)


def lattice_wavenumber(z, h):
    return (2.0 / h) * cmath.asin(cmath.sqrt(z) * h / 2.0)


def solve_problem(prob: DiscreteScatteringProblem, z):
    z = float(np.real(z))
    if not z > 0:
        raise DomainError("the oracle works at real positive energies only")
    h = prob.h
    if math.sqrt(z) * h >= 0.1:
        raise DomainError(f"wavelength under-resolved: h*sqrt(z) = {math.sqrt(z) * h:.3g} >= 0.1")
    kappa = lattice_wavenumber(z, h).real
    x = prob.x
    n = x.size
    ph = cmath.exp(1j * kappa * h)
    ab = np.zeros((3, n), dtype=np.complex128)  # rows: super, main, sub
    rhs = np.zeros(n, dtype=np.complex128)
    ab[1, 1:-1] = 2.0 + (prob.V[1:-1] - z) * h * h
    ab[0, 2:] = -1.0
    ab[2, :-2] = -1.0
    # left: reflected part is outgoing to the left
    ab[1, 0] = 1.0
    ab[0, 1] = -ph
    inc0, inc1 = cmath.exp(1j * kappa * x[0]), cmath.exp(1j * kappa * x[1])
    rhs[0] = inc0 - ph * inc1
    # right: purely outgoing
    ab[1, -1] = 1.0
    ab[2, -2] = -ph
    try:
        psi = solve_banded((1, 1), ab, rhs)
    except (LinAlgError, ValueError) as e:
        raise DomainError(f"singular discrete scattering system at z={z}: {e}") from None
    if not np.all(np.isfinite(psi)):
        raise DomainError(f"singular discrete scattering system at z={z}")
    R = (psi[0] - inc0) * cmath.exp(1j * kappa * x[0])
    T = psi[-1] * cmath.exp(-1j * kappa * x[-1])
    return ScatteringCoefficients(complex(z), complex(R), complex(T), branch="lattice")


def oracle_rt(p, z, h=DEFAULT_H, L=None):
    return solve_problem(build_problem(p, h, L), z)


def oracle_scan(p, E_lo, E_hi, n_points, h=DEFAULT_H, L=None, threads=1):
    if not 0 < E_lo < E_hi:
        raise DomainError("scan needs 0 < E_lo < E_hi")
    prob = build_problem(p, h, L)
    grid = np.linspace(E_lo, E_hi, int(n_points))
    fn = lambda e: solve_problem(prob, e)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            coeffs = list(pool.map(fn, grid))
    else:
        coeffs = [fn(e) for e in grid]
    return ScanTable(grid, np.array([c.R for c in coeffs]), np.array([c.T for c in coeffs]))


def oracle_peak(p, lo, hi, h=DEFAULT_H, L=None):
    """Location of the |T|^2 maximum of the discrete problem inside ``[lo, hi]``."""
    prob = build_problem(p, h, L)
    res = minimize_scalar(lambda e: -abs(solve_problem(prob, e).T) ** 2, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10 * max(1.0, hi)})
    return float(res.x)
