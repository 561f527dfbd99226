"""Outgoing-boundary maps, reflection and transmission coefficients, energy scans."""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import _kernels as K
from . import ode
from .boundstate import NONNODAL
from .errors import ConvergenceError, DomainError
from .propagate import initial_conditions

ZERO_REFLECTION = "zero-reflection"
RESONANCE = "resonance"
MODES = (ZERO_REFLECTION, RESONANCE)


def principal_sqrt(z):
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0:
        raise DomainError(f"z={z} lies on the branch cut of the square root")
    return cmath.sqrt(z)


def _left_sign(mode):
    if mode == ZERO_REFLECTION:
        return -1.0
    if mode == RESONANCE:
        return 1.0
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class ThetaPair:
    theta_plus: complex
    theta_minus: complex
    mode: str
    zeta: object

    def as_array(self):
        return np.array([self.theta_plus, self.theta_minus])

    @property
    def norm(self):
        return max(abs(self.theta_plus), abs(self.theta_minus))


def outgoing_functional(value, slope, k, sign):
    """``slope + sign * i k value``; sign -1 annihilates right-movers, +1 left-movers."""
    return slope + sign * 1j * k * value


def theta_map(bd, mode=ZERO_REFLECTION, z=None):
    z = bd.zeta.z if z is None else z
    k = principal_sqrt(z)
    tp = outgoing_functional(bd.plus.u, bd.plus.du, k, -1.0)
    tm = outgoing_functional(bd.minus.u, bd.minus.du, k, _left_sign(mode))
    return ThetaPair(tp, tm, mode, bd.zeta)


def jacobian(bd, mode=ZERO_REFLECTION):
    """``[[dw Theta+, dz Theta+], [dw Theta-, dz Theta-]]`` at ``bd.zeta``."""
    k = principal_sqrt(bd.zeta.z)
    rows = []
    for s, sign in ((bd.plus, -1.0), (bd.minus, _left_sign(mode))):
        dw = s.dwdu + sign * 1j * k * s.dwu
        dz = s.dzdu + sign * 1j * k * s.dzu + sign * 1j * s.u / (2.0 * k)
        rows.append([dw, dz])
    return np.array(rows, dtype=np.complex128)


@dataclass(frozen=True)
class ScatteringCoefficients:
    z: complex
    R: complex
    T: complex
    dR: complex | None = None
    dT: complex | None = None
    branch: str = "principal"

    @property
    def flux_defect(self):
        return abs(abs(self.R) ** 2 + abs(self.T) ** 2 - 1.0)


def compute_rt(p, z, derivative=False, mesh=None):
    """Left-incidence ``R`` and ``T`` by backward integration from ``+M``.

    With ``derivative=True`` the z-derivatives come from the augmented system.
    """
    z = complex(z)
    if not z.real > 0:
        raise DomainError(f"scattering needs Re z > 0, got {z}")
    k = principal_sqrt(z)
    M = p.M
    ek = cmath.exp(1j * k * M)
    dk = 0.5 / k
    if derivative:
        y0 = np.array([ek, 1j * k * ek, 1j * M * dk * ek, 1j * dk * ek * (1 + 1j * k * M)])
        system = K.SYS_SCAT
    else:
        y0 = np.array([ek, 1j * k * ek])
        system = K.SYS_PLAIN
    tr = ode.integrate(system, p.inner.program(), y0, M, -M, z, mesh=mesh)
    y = tr.final
    psi, dpsi = y[0], y[1]
    A = 0.5 * (psi + dpsi / (1j * k)) * ek
    B = 0.5 * (psi - dpsi / (1j * k)) / ek
    if abs(A) < 1e-300 or abs(A) < 1e-14 * (abs(psi) + abs(dpsi / k)) * abs(ek):
        raise DomainError(f"incoming amplitude vanishes at z={z} (transmission pole)")
    R, T = B / A, 1.0 / A
    if not derivative:
        return ScatteringCoefficients(z, R, T)
    zpsi, zdpsi = y[2], y[3]
    dA = 0.5 * (zpsi + zdpsi / (1j * k) - dpsi * dk / (1j * k * k)) * ek + A * 1j * M * dk
    dB = 0.5 * (zpsi - zdpsi / (1j * k) + dpsi * dk / (1j * k * k)) / ek - B * 1j * M * dk
    dR = (dB * A - B * dA) / (A * A)
    dT = -dA / (A * A)
    return ScatteringCoefficients(z, R, T, dR, dT)


def reflection_from_theta(bd, z=None):
    """Reflection coefficient assembled from the fundamental solutions' boundary values.

    The right-outgoing combination ``psi = u + t v`` is fixed by ``Theta+ = 0``,
    and the two left functionals of ``psi`` give the reflected and incoming
    amplitudes. Returns ``(R, w_solved)``.
    """
    z = bd.zeta.z if z is None else complex(z)
    k = principal_sqrt(z)
    M = bd.M
    pu = outgoing_functional(bd.plus.u, bd.plus.du, k, -1.0)
    pv = outgoing_functional(bd.plus.v, bd.plus.dv, k, -1.0)
    if abs(pv) < 1e-14 * (abs(bd.plus.v) + abs(bd.plus.dv)) * max(1.0, abs(k)):
        raise DomainError("outgoing condition does not determine the mixing coefficient")
    t = -pu / pv
    val = bd.minus.u + t * bd.minus.v
    slope = bd.minus.du + t * bd.minus.dv
    reflected = outgoing_functional(val, slope, k, -1.0) * cmath.exp(-1j * k * M) / (-2j * k)
    incoming = outgoing_functional(val, slope, k, 1.0) * cmath.exp(1j * k * M) / (2j * k)
    if incoming == 0:
        raise DomainError("incoming amplitude vanishes")
    y0 = initial_conditions(bd.case, bd.zeta.w)
    psi0 = y0[0] + t * y0[2]
    dpsi0 = y0[1] + t * y0[3]
    w_solved = dpsi0 / psi0 if bd.case == NONNODAL else -psi0 / dpsi0
    return reflected / incoming, w_solved


@dataclass(frozen=True)
class ScanTable:
    E: np.ndarray
    R: np.ndarray
    T: np.ndarray

    @property
    def absR2(self):
        return np.abs(self.R) ** 2

    @property
    def absT2(self):
        return np.abs(self.T) ** 2

    def rows(self):
        for e, r, t in zip(self.E, self.R, self.T):
            yield e, abs(r) ** 2, abs(t) ** 2, r.real, r.imag, t.real, t.imag


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def scan_rt(p, E_lo, E_hi, n_points, threads=1, refine=False):
    """``compute_rt`` on a uniform grid; ``refine`` inserts the located |T|^2 peak tops."""
    if not 0 < E_lo < E_hi:
        raise DomainError("scan needs 0 < E_lo < E_hi")
    if n_points < 2:
        raise DomainError("scan needs at least two points")
    grid = np.linspace(E_lo, E_hi, int(n_points))
    if refine:
        coarse = scan_rt(p, E_lo, E_hi, n_points, threads)
        tops = [refine_peak(p, grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]) for i in local_maxima(coarse.absT2)]
        grid = np.unique(np.concatenate([grid, tops]))
    coeffs = _map(lambda e: compute_rt(p, e), grid, threads)
    return ScanTable(grid, np.array([c.R for c in coeffs]), np.array([c.T for c in coeffs]))


def transmission(p, E):
    return abs(compute_rt(p, E).T) ** 2


def local_maxima(values):
    v = np.asarray(values)
    idx = [i for i in range(1, v.size - 1) if v[i] >= v[i - 1] and v[i] > v[i + 1]]
    return idx


def refine_peak(p, lo, hi):
    """Energy of the |T|^2 maximum inside ``[lo, hi]``."""
    res = minimize_scalar(lambda e: -transmission(p, e), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * max(1.0, hi)})
    return float(res.x)


def half_max_width(p, E_peak, max_span=None):
    """Full width at half maximum of the |T|^2 peak at ``E_peak``."""
    top = transmission(p, E_peak)
    half = 0.5 * top
    span = max_span or max(1.0, E_peak)
    edges = []
    for direction in (-1.0, 1.0):
        step = 1e-6 * max(1.0, E_peak)
        a = E_peak
        while True:
            b = E_peak + direction * step
            if not 0 < b:
                raise ConvergenceError("half maximum not reached before E = 0")
            if transmission(p, b) < half:
                break
            a = b
            step *= 2.0
            if step > span:
                raise ConvergenceError("half maximum not reached within search span")
        lo, hi = sorted((a, b))
        edges.append(brentq(lambda e: transmission(p, e) - half, lo, hi, xtol=1e-14 * max(1.0, E_peak)))
    return edges[1] - edges[0]


def peak_table(p, table: ScanTable):
    """``(E_peak, |T|^2, |R|^2)`` for every interior local maximum of |T|^2 in ``table``."""
    out = []
    E = table.E
    for i in local_maxima(table.absT2):
        e = refine_peak(p, E[i - 1], E[i + 1])
        c = compute_rt(p, e)
        out.append((e, abs(c.T) ** 2, abs(c.R) ** 2))
    return out
