"""Defect bound states: Dirichlet spectrum, selection, refinement and normalization data."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.optimize import brentq

from . import _kernels as K
from . import ode
from .errors import DecayFitError, DomainError, EigenSolverError, LocalizationError
from .potential import PotentialSpec, TruncatedPotential

NONNODAL = "nonnodal"
NODAL = "nodal"
NODE_THRESHOLD = 1e-6
MIN_MASS_FRACTION = 0.9


@dataclass(frozen=True)
class Spectrum:
    h: float
    L: float
    x: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray  # one column per energy, unit Euclidean norm, Dirichlet zeros at the ends

    def __len__(self):
        return self.energies.size


def _as_callable(p):
    if isinstance(p, (TruncatedPotential, PotentialSpec)):
        return p
    raise TypeError("expected a potential")


def solve_dirichlet_spectrum(p, L, h, window=None):
    """Eigenpairs of ``-D_h^2 + V`` on ``[-L, L]`` with Dirichlet ends.

    ``window=(lo, hi)`` restricts the eigenvectors that are returned; without
    it the whole spectrum is returned.
    """
    _as_callable(p)
    if isinstance(p, TruncatedPotential) and not L > p.M:
        raise DomainError(f"domain half-width L={L} must exceed M={p.M}")
    if not (h > 0 and L > 0):
        raise DomainError("grid step and domain half-width must be positive")
    n_half = int(round(L / h))
    x = h * np.arange(-n_half, n_half + 1)
    inner = x[1:-1]
    diag = 2.0 / h**2 + np.asarray(p(inner), dtype=float)
    off = np.full(inner.size - 1, -1.0 / h**2)
    try:
        if window is None:
            w, v = eigh_tridiagonal(diag, off, lapack_driver="stemr")
        else:
            lo, hi = window
            w, v = eigh_tridiagonal(diag, off, select="v", select_range=(lo, hi), lapack_driver="stemr")
    except LinAlgError as e:
        raise EigenSolverError(f"tridiagonal eigensolver failed: {e}") from None
    vectors = np.zeros((x.size, w.size))
    vectors[1:-1] = v
    order = np.argsort(w)
    return Spectrum(h=h, L=n_half * h, x=x, energies=w[order], vectors=vectors[:, order])


def mass_fraction(x, phi, radius):
    phi2 = np.abs(phi) ** 2
    total = phi2.sum()
    return float(phi2[np.abs(x) <= radius].sum() / total) if total > 0 else 0.0


def select_defect_state(s: Spectrum, window, rho):
    """The most localized eigenpair in ``window``; it must keep 90% of its mass within ``rho + 2``."""
    lo, hi = window
    if not lo < hi:
        raise DomainError("empty energy window")
    idx = np.nonzero((s.energies >= lo) & (s.energies <= hi))[0]
    if idx.size == 0:
        raise LocalizationError(f"no eigenvalue in [{lo}, {hi}]")
    fractions = [mass_fraction(s.x, s.vectors[:, j], rho + 2.0) for j in idx]
    best = int(np.argmax(fractions))
    if fractions[best] < MIN_MASS_FRACTION:
        raise LocalizationError(
            f"no localized state in [{lo}, {hi}]: best mass fraction {fractions[best]:.3f}"
        )
    j = idx[best]
    return float(s.energies[j]), s.vectors[:, j].copy(), fractions[best]


@dataclass(frozen=True)
class EtaData:
    E: float
    x: np.ndarray
    phi: np.ndarray
    case: str
    w0: float
    k_minus: float
    k_plus: float
    M: float
    rho: float
    fit_residual: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def k(self):
        return min(self.k_minus, self.k_plus)

    @property
    def nodal(self):
        return self.case == NODAL

    def to_dict(self):
        return {
            "E": self.E,
            "case": self.case,
            "w0": self.w0,
            "k_minus": self.k_minus,
            "k_plus": self.k_plus,
            "k": self.k,
            "M": self.M,
            "rho": self.rho,
            "fit_residual": self.fit_residual,
            "extras": self.extras,
            "x": self.x.tolist(),
            "phi": self.phi.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            E=float(d["E"]),
            x=np.asarray(d["x"], dtype=float),
            phi=np.asarray(d["phi"], dtype=float),
            case=d["case"],
            w0=float(d["w0"]),
            k_minus=float(d["k_minus"]),
            k_plus=float(d["k_plus"]),
            M=float(d["M"]),
            rho=float(d["rho"]),
            fit_residual=float(d.get("fit_residual", 0.0)),
            extras=dict(d.get("extras", {})),
        )

    def dumps(self):
        return json.dumps(self.to_dict())

    def with_M(self, M):
        """Same bound state reused for another truncation half-width."""
        km, kp, res = fit_decay_rates(self.x, self.phi, M, self.rho)
        return EtaData(self.E, self.x, self.phi, self.case, self.w0, km, kp, M, self.rho, res, self.extras)


def _value_and_slope_at_zero(x, phi):
    i0 = int(np.argmin(np.abs(x)))
    h = x[1] - x[0]
    if abs(x[i0]) < 1e-12 * h and 2 <= i0 <= x.size - 3:
        d = (-phi[i0 + 2] + 8 * phi[i0 + 1] - 8 * phi[i0 - 1] + phi[i0 - 2]) / (12 * h)
        return float(phi[i0]), float(d)
    sl = slice(max(0, i0 - 6), min(x.size, i0 + 7))
    cs = CubicSpline(x[sl], phi[sl])
    return float(cs(0.0)), float(cs(0.0, 1))


def fit_decay_rates(x, phi, M, rho, window=None, offsets=16):
    """Tail decay rates ``(k_minus, k_plus, residual)`` from log-linear fits.

    Samples sit at whole-period spacing so the Floquet oscillation drops out;
    the median over ``offsets`` phase shifts guards against tail nodes.
    """
    lo, hi = (rho + 1.0, M) if window is None else window
    if hi - lo < 1.0 or M - rho < 2.0:
        raise DecayFitError(f"tail window [{lo:.3g}, {hi:.3g}] is shorter than two periods past the defect")
    if hi > min(-x[0], x[-1]) + 1e-12:
        raise DecayFitError("bound-state samples do not cover the fit window")
    spline = CubicSpline(x, phi)
    rates = []
    resid = 0.0
    for side in (-1.0, 1.0):
        ks = []
        for j in range(offsets):
            a = lo + j / offsets
            pts = a + np.arange(0, int(math.floor(hi - a + 1e-12)) + 1)
            if pts.size < 2:
                continue
            vals = np.abs(spline(side * pts))
            if np.any(vals <= 0):
                continue
            coef, res, *_ = np.polyfit(pts, np.log(vals), 1, full=True)
            ks.append(-coef[0])
            fitted = np.polyval(coef, pts)
            resid = max(resid, float(np.abs(fitted - np.log(vals)).max()))
        if not ks:
            raise DecayFitError("no usable tail samples")
        k = float(np.median(ks))
        if not k > 0:
            raise DecayFitError(f"non-positive fitted decay rate {k:.3g} on the {'left' if side < 0 else 'right'}")
        rates.append(k)
    return rates[0], rates[1], resid


def eta_data(E, x, phi, M, rho, slope_at_zero=None):
    """Normalize a bound state and fit its tail decay.

    ``slope_at_zero`` replaces the finite-difference derivative when an exact
    value is available (it must refer to the same scaling as ``phi``).
    """
    if not E > 0:
        raise DomainError(f"bound-state energy must be positive, got {E}")
    x = np.asarray(x, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if min(-x[0], x[-1]) < M - 1e-12:
        raise DomainError("bound-state samples must cover [-M, M]")
    p0, d0 = _value_and_slope_at_zero(x, phi)
    if slope_at_zero is not None:
        d0 = float(slope_at_zero)
    if abs(p0) >= NODE_THRESHOLD * np.abs(phi).max():
        case = NONNODAL
        scaled = phi / p0
        w0 = d0 / p0
    else:
        case = NODAL
        scaled = phi / d0
        w0 = 0.0
    km, kp, res = fit_decay_rates(x, scaled, M, rho)
    return EtaData(E=float(E), x=x, phi=scaled, case=case, w0=float(w0), k_minus=km, k_plus=kp,
                   M=float(M), rho=float(rho), fit_residual=res)


def _inward(program, E, x_far, x_stop, dx, chunk=1.0):
    """Decaying solution integrated from ``x_far`` towards 0 with renormalization.

    Returns the state at 0 and samples on the uniform grid between ``x_stop`` and 0.
    """
    sgn = 1.0 if x_far > 0 else -1.0
    y = np.array([1.0, -sgn], dtype=complex)
    x = x_far
    # far part, adaptive, renormalized chunk by chunk
    while abs(x) > abs(x_stop) + 1e-12:
        nxt = sgn * max(abs(x) - chunk, abs(x_stop))
        y = ode.integrate(K.SYS_PLAIN, program, y, x, nxt, E, rtol=1e-13, atol=1e-300).final
        y = y / np.abs(y).max()
        x = nxt
    n = int(round(abs(x_stop) / dx))
    mesh = sgn * dx * np.arange(n, -1, -1)
    tr = ode.integrate(K.SYS_PLAIN, program, y, mesh[0], 0.0, E, mesh=mesh)
    return tr.final.real, mesh, tr.ys[:, 0].real


def _mismatch(program, E, x_far):
    yl = _inward_endpoint(program, E, -x_far)
    yr = _inward_endpoint(program, E, x_far)
    yl = yl / np.hypot(*yl)
    yr = yr / np.hypot(*yr)
    return yl[0] * yr[1] - yl[1] * yr[0]


def _inward_endpoint(program, E, x_far, chunk=2.0):
    sgn = 1.0 if x_far > 0 else -1.0
    y = np.array([1.0, -sgn], dtype=complex)
    x = x_far
    while abs(x) > 0:
        nxt = sgn * max(abs(x) - chunk, 0.0)
        y = ode.integrate(K.SYS_PLAIN, program, y, x, nxt, E, rtol=1e-13, atol=1e-300).final
        y = y / np.abs(y).max()
        x = nxt
    return y.real


def refine_eta(spec, E_guess, M, rho, dx=0.005, x_far=None, sample_to=None):
    """Sharpen an approximate eigenvalue by shooting and return an :class:`EtaData`.

    Decaying solutions are integrated inward from ``±x_far`` and the energy is
    the root of their normalized Wronskian at 0. Samples of the bound state on
    ``[-sample_to, sample_to]`` come from the same inward solutions.
    """
    if isinstance(spec, TruncatedPotential):
        spec = spec.inner
    program = spec.program()
    x_far = float(M + 40.0 if x_far is None else x_far)
    sample_to = float(M + 2.0 if sample_to is None else sample_to)
    scale = max(1.0, abs(E_guess))
    f = lambda e: _mismatch(program, e, x_far)
    f0 = f(E_guess)
    bracket = None
    for d in (1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1):
        a, b = E_guess - d * scale, E_guess + d * scale
        fa, fb = f(a), f(b)
        if fa * f0 <= 0:
            bracket = (a, E_guess)
            break
        if fb * f0 <= 0:
            bracket = (E_guess, b)
            break
    if bracket is None:
        raise DomainError(f"shooting found no eigenvalue near {E_guess}")
    E = brentq(f, *bracket, xtol=1e-15 * scale, maxiter=200)
    y0r, xr, pr = _inward(program, E, x_far, sample_to, dx)
    y0l, xl, pl = _inward(program, E, -x_far, -sample_to, dx)
    # match the two halves at 0 by the larger of value and slope
    if abs(y0r[0]) * math.sqrt(max(E, 1.0)) >= abs(y0r[1]):
        pl = pl * (y0r[0] / y0l[0])
        slope = y0r[1] / y0r[0]
        value, deriv = 1.0, slope
        pr = pr / y0r[0]
        pl = pl / y0r[0]
    else:
        pl = pl * (y0r[1] / y0l[1])
        pr = pr / y0r[1]
        pl = pl / y0r[1]
        value, deriv = y0r[0] / y0r[1], 1.0
    x = np.concatenate([xl[:-1], xr])
    phi = np.concatenate([pl[:-1], pr])
    order = np.argsort(x)
    x, phi = x[order], phi[order]
    eta = eta_data(E, x, phi, M, rho, slope_at_zero=deriv)
    eta.extras.update({"shooting_far": x_far, "mismatch": float(f(E)), "value_at_zero": value})
    return eta


def bound_state(p, window, L, h=0.005, refine=True):
    """Dirichlet spectrum, localized-state selection and (optionally) shooting refinement.

    ``p`` is a truncated potential; the eigenproblem uses the untruncated
    potential, whose gap state is the one the truncation perturbs.
    """
    spec = p.inner if isinstance(p, TruncatedPotential) else p
    s = solve_dirichlet_spectrum(spec, L, h, window=window)
    E, phi, frac = select_defect_state(s, window, spec.rho)
    if refine:
        eta = refine_eta(spec, E, p.M, spec.rho)
    else:
        eta = eta_data(E, s.x, phi, p.M, spec.rho)
    eta.extras.update({"fd_E": E, "fd_h": s.h, "fd_L": s.L, "mass_fraction": frac, "refined": bool(refine)})
    return eta
