"""Truncated harmonic oscillator ``V = x^2``: closed forms and state location."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from numpy.polynomial import hermite as H
from numpy.polynomial import polynomial as P

from .boundstate import NODAL, NONNODAL, EtaData
from .errors import DomainError
from .locator import NEWTON, ZERO_REFLECTION, locate_state, xi_data
from .potential import HarmonicOffset, TruncatedPotential
from .propagate import Zeta, integrate_fundamentals
from .scattering import RESONANCE


@dataclass(frozen=True)
class HermiteState:
    """``Phi_n = p_n(x) exp(-x^2/2)`` with ``p_n(0) = 1`` (even) or ``p_n'(0) = 1`` (odd)."""

    n: int
    coefficients: np.ndarray  # power basis, ascending
    scale: float  # p_n = scale * H_n (physicists' Hermite)

    @property
    def E(self):
        return 2 * self.n + 1

    @property
    def parity(self):
        return "even" if self.n % 2 == 0 else "odd"

    def phi(self, x, derivative=0):
        x = np.asarray(x, dtype=float)
        g = np.exp(-0.5 * x * x)
        p = P.polyval(x, self.coefficients)
        if derivative == 0:
            return p * g
        dp = P.polyval(x, P.polyder(self.coefficients))
        if derivative == 1:
            return (dp - x * p) * g
        d2p = P.polyval(x, P.polyder(self.coefficients, 2))
        return (d2p - 2 * x * dp + (x * x - 1) * p) * g


def sho_bound_state(n: int) -> HermiteState:
    if n < 0:
        raise DomainError("state index must be non-negative")
    basis = np.zeros(n + 1)
    basis[n] = 1.0
    c = H.herm2poly(basis)
    anchor = c[0] if n % 2 == 0 else c[1]
    return HermiteState(n, c / anchor, 1.0 / anchor)


@dataclass(frozen=True)
class SeriesSolution:
    n: int
    coefficients: tuple  # mpmath numbers a_0..a_K
    M: float

    @property
    def K(self):
        return len(self.coefficients) - 1


def series_coefficients(n, M, min_terms=64, tol=1e-16):
    """Coefficients of ``v = exp(x^2/2) sum a_k x^k`` truncated for ``|x| <= M``.

    ``K`` is at least ``min_terms`` and large enough that the last terms are
    below ``tol`` times the sum of absolute terms at ``x = M``, sharpened by
    ``exp(-M^2)`` because the alternating sum cancels down by about that factor.
    """
    tol = tol * math.exp(-M * M)
    with mpmath.workdps(_dps(M)):
        a = [mpmath.mpf(1 if n % 2 else 0), mpmath.mpf(0 if n % 2 else 1)]
        Mm = mpmath.mpf(M)
        total = abs(a[0]) + abs(a[1]) * Mm
        k = 0
        while True:
            a.append(-2 * mpmath.mpf(k + n + 1) / ((k + 2) * (k + 1)) * a[k])
            k += 1
            K = len(a) - 1
            term = abs(a[K]) * Mm**K
            total += term
            if K >= min_terms and term < tol * total and abs(a[K - 1]) * Mm ** (K - 1) < tol * total:
                break
            if K > 20000:
                raise DomainError("series truncation did not reach the tail tolerance")
    return SeriesSolution(n, tuple(a), float(M))


def _dps(M):
    # terms reach about exp(M^2) before cancelling
    return 30 + int(M * M / math.log(10)) + 5


def sho_v_eta(n, x, M=None, derivative=False):
    """The series ``exp(x^2/2) sum a_k x^k`` (and optionally its derivative) at real ``x``."""
    M = abs(x) if M is None else M
    if abs(x) > M + 1e-12:
        raise DomainError("x lies beyond the series truncation radius")
    s = series_coefficients(n, max(M, abs(x), 1.0))
    with mpmath.workdps(_dps(max(M, 1.0))):
        xm = mpmath.mpf(x)
        g = mpmath.mpf(0)
        dg = mpmath.mpf(0)
        for k in range(s.K, -1, -1):
            dg = dg * xm + g
            g = g * xm + s.coefficients[k]
        e = mpmath.exp(xm * xm / 2)
        v = e * g
        if not derivative:
            return float(v)
        dv = e * (xm * g + dg)
        return float(v), float(dv)


def sho_fundamentals(n, x):
    """``(u, u', v, v')`` at ``x`` with the initial data of the fundamental set at ``w = 0``.

    For odd ``n`` the series solution carries the opposite sign to the
    fundamental ``v`` (``v(0) = -1``), so it is negated.
    """
    st = sho_bound_state(n)
    u, du = float(st.phi(x)), float(st.phi(x, 1))
    v, dv = sho_v_eta(n, x, derivative=True)
    if n % 2:
        v, dv = -v, -dv
    return u, du, v, dv


def sho_ball_radius(n, M):
    return M ** (-(n + 2)) * math.exp(-0.5 * M * M)


def sho_potential(M):
    return TruncatedPotential(HarmonicOffset(c0=0.0), M)


def sho_eta(n, M, dx=0.005):
    """Analytic bound-state package for the oscillator at truncation ``M``.

    The decay-rate fields hold the local rate ``M`` at the truncation edge.
    """
    st = sho_bound_state(n)
    half = int(round((M + 2.0) / dx))
    x = dx * np.arange(-half, half + 1)
    return EtaData(
        E=float(st.E), x=x, phi=st.phi(x), case=NONNODAL if n % 2 == 0 else NODAL, w0=0.0,
        k_minus=float(M), k_plus=float(M), M=float(M), rho=0.0, extras={"analytic": True, "n": n},
    )


def sho_locate(n, M, mode=ZERO_REFLECTION, method=NEWTON, check_ball=None):
    """Zero-reflection state or resonance of the oscillator truncated at ``M``.

    The ball check (ten radii ``M^-(n+2) e^{-M^2/2}``) applies to the
    zero-reflection mode unless ``check_ball`` says otherwise.
    """
    if not M > 0:
        raise DomainError("truncation half-width must be positive")
    eta = sho_eta(n, M)
    p = sho_potential(M)
    check = mode == ZERO_REFLECTION if check_ball is None else check_ball
    return locate_state(eta, p, mode, method, radius=sho_ball_radius(n, M), check_ball=check)


def sho_scaling(n, M):
    """Boundary magnitudes divided by their predicted growth in ``M``."""
    eta = sho_eta(n, M)
    p = sho_potential(M)
    bd = integrate_fundamentals(p, Zeta(0.0, eta.E), eta.case)
    xi = xi_data(eta, p, ZERO_REFLECTION, bd=bd)
    grow = math.exp(0.5 * M * M)
    return {
        "N": abs(xi.N) / (M * grow),
        "dz_theta": max(abs(xi.J[0, 1]), abs(xi.J[1, 1])) / (M ** (n + 1) * grow),
        "u": max(abs(bd.plus.u), abs(bd.minus.u)) / (M**n / grow),
        "v": max(abs(bd.plus.v), abs(bd.minus.v)) / grow,
    }


__all__ = [
    "HermiteState",
    "SeriesSolution",
    "sho_bound_state",
    "series_coefficients",
    "sho_v_eta",
    "sho_fundamentals",
    "sho_ball_radius",
    "sho_eta",
    "sho_locate",
    "sho_scaling",
    "RESONANCE",
]
