"""Zero-reflection states and resonances near a bound state.

Both are zeros of the outgoing map ``Theta(w, z)`` in ``C^2``; they are found
by the frozen-Jacobian fixed-point iteration ``zeta -> zeta - Xi Theta(zeta)``
or by Newton's method, always starting from ``eta = (w0, E)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import ode
from .errors import ConvergenceError, LocalizationError, SingularJacobianError
from .propagate import BoundaryData, Zeta, integrate_fundamentals
from .scattering import (
    RESONANCE,
    ZERO_REFLECTION,
    compute_rt,
    jacobian,
    reflection_from_theta,
    theta_map,
)

FIXED_POINT = "fixed-point"
NEWTON = "newton"
STEP_TOL = 1e-14
RESIDUAL_TOL = 1e-10
MAX_ITER = 100
SAFETY = 10.0
ASYM_RTOL = 1e-13


def omega_radius(k, M):
    """Radius ``e^{-kM} / M^2`` of the uniqueness ball around ``eta``."""
    return math.exp(-k * M) / M**2


def eta_zeta(eta):
    return Zeta(eta.w0, eta.E)


def _identity_jacobian(bd: BoundaryData, mode):
    """Jacobian with the w- and z-derivatives rebuilt from the closed-form identities."""
    w = bd.zeta.w
    c = w / (1.0 + w * w)
    k = cmath.sqrt(bd.zeta.z)
    rows = []
    for s, sign in ((bd.plus, -1.0), (bd.minus, -1.0 if mode == ZERO_REFLECTION else 1.0)):
        dwu, dwdu = c * s.u + s.v, c * s.du + s.dv
        dzu, dzdu = s.Iuv * s.u - s.Iuu * s.v, s.Iuv * s.du - s.Iuu * s.dv
        rows.append([dwdu + sign * 1j * k * dwu, dzdu + sign * 1j * k * dzu + sign * 1j * s.u / (2 * k)])
    return np.array(rows, dtype=np.complex128)


@dataclass(frozen=True)
class XiData:
    mode: str
    N: complex
    Xi: np.ndarray
    J: np.ndarray
    bd: BoundaryData

    @property
    def inverse_defect(self):
        """Relative deviation of ``Xi J`` from the identity."""
        return float(np.abs(self.Xi @ self.J - np.eye(2)).max())


def xi_data(eta, p, mode=ZERO_REFLECTION, bd=None):
    """Jacobian of ``Theta`` at ``eta``, its determinant and inverse."""
    if bd is None:
        bd = integrate_fundamentals(p, eta_zeta(eta), eta.case)
    J = _identity_jacobian(bd, mode)
    N = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    scale = np.abs(J).max() ** 2
    if not abs(N) > 1e-14 * scale:
        raise SingularJacobianError(f"Jacobian determinant vanishes at eta (|N| = {abs(N):.3g})")
    Xi = np.array([[J[1, 1], -J[0, 1]], [-J[1, 0], J[0, 0]]]) / N
    return XiData(mode, complex(N), Xi, J, bd)


@dataclass
class LocatedState:
    mode: str
    method: str
    zeta: Zeta
    residual: np.ndarray
    iterations: int
    ball_radius: float
    distance: float
    steps: list = field(default_factory=list)
    verification_residual: float = float("nan")
    reflection: complex | None = None

    @property
    def z(self):
        return self.zeta.z

    @property
    def w(self):
        return self.zeta.w

    @property
    def residual_norm(self):
        return float(np.abs(self.residual).max())

    @property
    def in_ball(self):
        return self.distance <= self.ball_radius

    @property
    def in_safety_ball(self):
        return self.distance <= SAFETY * self.ball_radius

    def to_dict(self):
        return {
            "mode": self.mode,
            "method": self.method,
            "w": [self.w.real, self.w.imag],
            "z": [self.z.real, self.z.imag],
            "residual": [[r.real, r.imag] for r in self.residual],
            "residual_norm": self.residual_norm,
            "verification_residual": self.verification_residual,
            "iterations": self.iterations,
            "ball_radius": self.ball_radius,
            "distance_from_E": self.distance,
            "in_ball": self.in_ball,
            "in_safety_ball": self.in_safety_ball,
            "step_sizes": self.steps,
            "reflection": None if self.reflection is None else [self.reflection.real, self.reflection.imag],
        }


def locate_state(eta, p, mode=ZERO_REFLECTION, method=NEWTON, radius=None, max_iter=MAX_ITER,
                 tol=STEP_TOL, check_ball=True):
    """Zero of ``Theta`` for ``mode`` near ``eta``.

    The integration mesh is fixed at the first evaluation so every iterate sees
    the same discrete flow. ``radius`` defaults to ``e^{-kM}/M^2``; a root
    farther than ten radii from ``E`` is rejected.
    """
    if mode not in (ZERO_REFLECTION, RESONANCE):
        raise ValueError(f"unknown mode {mode!r}")
    zeta = eta_zeta(eta)
    bd = integrate_fundamentals(p, zeta, eta.case)
    meshes = bd.meshes
    radius = omega_radius(eta.k, p.M) if radius is None else radius
    Xi = xi_data(eta, p, mode, bd=bd).Xi if method == FIXED_POINT else None
    if method not in (FIXED_POINT, NEWTON):
        raise ValueError(f"unknown method {method!r}")
    z = zeta.as_array()
    steps = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        theta = theta_map(bd, mode).as_array()
        if method == NEWTON:
            J = jacobian(bd, mode)
            try:
                delta = np.linalg.solve(J, theta)
            except np.linalg.LinAlgError:
                raise SingularJacobianError(f"singular Jacobian at iteration {it}") from None
        else:
            delta = Xi @ theta
        if not np.all(np.isfinite(delta)):
            raise ConvergenceError(f"non-finite update at iteration {it}")
        z = z - delta
        size = float(np.abs(delta).max())
        steps.append(size)
        bd = integrate_fundamentals(p, Zeta.from_array(z), eta.case, meshes=meshes)
        if size < tol * max(1.0, float(np.abs(z).max())):
            converged = True
            break
    if not converged:
        raise ConvergenceError(f"{method} iteration did not converge in {max_iter} steps")
    final = Zeta.from_array(z)
    residual = theta_map(bd, mode).as_array()
    fresh = integrate_fundamentals(p, final, eta.case)
    verify = theta_map(fresh, mode).norm
    distance = abs(final.z - eta.E)
    if check_ball and distance > SAFETY * radius:
        raise LocalizationError(
            f"root at z={final.z} lies {distance:.3g} from E, beyond {SAFETY:g} ball radii ({radius:.3g})"
        )
    refl = reflection_from_theta(fresh)[0] if mode == ZERO_REFLECTION and final.z.real > 0 else None
    return LocatedState(mode, method, final, residual, it, radius, distance, steps, verify, refl)


@dataclass(frozen=True)
class AsymptoticLocations:
    w_Y: complex
    z_Y: complex
    z_X: complex
    split_z_Y: complex
    split_z_X: complex
    gap: float
    distance_quotient: float
    split_defect: float


def asymptotic_locations(eta, p, bd=None):
    """Leading-order locations of the zero-reflection state and the resonance.

    The split real/imaginary forms rely on the Wronskian being exactly one, so
    the boundary data is integrated with a tighter tolerance than the default.
    """
    if bd is None:
        bd = integrate_fundamentals(p, eta_zeta(eta), eta.case, rtol=ASYM_RTOL, atol=1e-15)
    E = eta.E
    s = math.sqrt(E)
    up, dup, vp, dvp = (c.real for c in (bd.plus.u, bd.plus.du, bd.plus.v, bd.plus.dv))
    um, dum, vm, dvm = (c.real for c in (bd.minus.u, bd.minus.du, bd.minus.v, bd.minus.dv))
    I_right = bd.int_u2_right.real
    I_left = bd.int_u2_left.real
    I = I_right + I_left

    av_p = dvp - 1j * s * vp
    av_m = dvm - 1j * s * vm
    au_p = dup - 1j * s * up
    au_m = dum - 1j * s * um
    if min(abs(av_p), abs(av_m)) == 0:
        raise LocalizationError("outgoing combination of v vanishes; eta is corrupted")
    denom = I * av_p * av_m
    z_Y = E - (av_p * au_m - av_m * au_p) / denom
    w_Y = eta.w0 - (I_left * av_m * au_p + I_right * av_p * au_m) / denom

    av_m_res = dvm + 1j * s * vm
    au_m_res = dum + 1j * s * um
    z_X = E - (av_p * au_m_res - av_m_res * au_p) / (I * av_p * av_m_res)

    P_p = dvp**2 + E * vp**2
    P_m = dvm**2 + E * vm**2
    re = E - (P_p * (dvm * dum + E * vm * um) - P_m * (dvp * dup + E * vp * up)) / (I * P_m * P_p)
    im_y = s * (P_p - P_m) / (I * P_m * P_p)
    im_x = -s * (P_p + P_m) / (I * P_m * P_p)
    split_y = complex(re, im_y)
    split_x = complex(re, im_x)
    defect = max(abs(split_y - z_Y) / abs(z_Y - E), abs(split_x - z_X) / abs(z_X - E))
    return AsymptoticLocations(
        w_Y=complex(w_Y), z_Y=complex(z_Y), z_X=complex(z_X), split_z_Y=split_y, split_z_X=split_x,
        gap=2 * s / (I * P_m), distance_quotient=abs(P_p / P_m), split_defect=float(defect),
    )


@dataclass
class ComparisonReport:
    M: float
    E: float
    k: float
    z_Y: complex
    z_X: complex
    asym_z_Y: complex
    asym_w_Y: complex
    asym_z_X: complex
    split_defect: float
    im_gap_predicted: float
    distance_quotient: float
    gamma_radius: float
    sup_R_on_gamma: float
    sup_dR_on_gamma: float
    R_center: complex
    cauchy_riemann_residual: float
    N_eta: complex
    bounds_asserted: bool
    state_Y: LocatedState | None = None
    state_X: LocatedState | None = None

    @property
    def im_gap_actual(self):
        return self.z_Y.imag - self.z_X.imag

    @property
    def gap_relative_error(self):
        return abs(self.im_gap_actual - self.im_gap_predicted) / abs(self.im_gap_predicted)

    @property
    def asym_ratio(self):
        return abs(self.z_Y - self.asym_z_Y) / abs(self.z_Y - self.E)

    def to_dict(self):
        c = lambda v: [v.real, v.imag]
        return {
            "M": self.M,
            "E": self.E,
            "k": self.k,
            "z_Y": c(self.z_Y),
            "z_X": c(self.z_X),
            "asym_z_Y": c(self.asym_z_Y),
            "asym_w_Y": c(self.asym_w_Y),
            "asym_z_X": c(self.asym_z_X),
            "asym_ratio": self.asym_ratio,
            "split_defect": self.split_defect,
            "im_gap_predicted": self.im_gap_predicted,
            "im_gap_actual": self.im_gap_actual,
            "gap_relative_error": self.gap_relative_error,
            "distance_quotient": self.distance_quotient,
            "gamma_radius": self.gamma_radius,
            "sup_R_on_gamma": self.sup_R_on_gamma,
            "sup_dR_on_gamma": self.sup_dR_on_gamma,
            "R_center": c(self.R_center),
            "cauchy_riemann_residual": self.cauchy_riemann_residual,
            "N_eta": c(self.N_eta),
            "bounds_asserted": self.bounds_asserted,
            "state_Y": None if self.state_Y is None else self.state_Y.to_dict(),
            "state_X": None if self.state_X is None else self.state_X.to_dict(),
        }


def gamma_samples(center, radius, n=64):
    theta = 2 * math.pi * np.arange(n) / n
    return center + radius * np.exp(1j * theta)


def sup_on_disk(p, center, radius, n=64):
    """Largest ``|R|`` and ``|dR/dz|`` over ``n`` boundary points and the center."""
    pts = np.concatenate([[center], gamma_samples(center, radius, n)])
    supR = supD = 0.0
    for z in pts:
        c = compute_rt(p, z, derivative=True)
        supR = max(supR, abs(c.R))
        supD = max(supD, abs(c.dR))
    return supR, supD


def cauchy_riemann_residual(p, center, radius, divisions=32):
    """Relative mismatch of the x- and y-derivatives of ``R`` at ``center``.

    A 5x5 stencil of spacing ``radius / divisions`` is evaluated on one frozen
    integration mesh; fourth-order differences along both axes must agree for an
    analytic function.
    """
    h = radius / divisions
    k = cmath.sqrt(center)
    ek = cmath.exp(1j * k * p.M)
    mesh = ode.integrate(K.SYS_PLAIN, p.inner.program(), np.array([ek, 1j * k * ek]), p.M, -p.M, center).xs
    grid = {}
    for a in range(-2, 3):
        for b in range(-2, 3):
            grid[a, b] = compute_rt(p, center + h * (a + 1j * b), mesh=mesh).R
    d = lambda f2, f1, m1, m2: (-f2 + 8 * f1 - 8 * m1 + m2) / (12 * h)
    dx = d(grid[2, 0], grid[1, 0], grid[-1, 0], grid[-2, 0])
    dy = d(grid[0, 2], grid[0, 1], grid[0, -1], grid[0, -2])
    return abs(dx - dy / 1j) / abs(dx), grid


def comparison_report(eta, p, method=NEWTON, sample_points=64, with_bounds=True):
    """Locate both states and evaluate the comparison quantities at one truncation."""
    bd = integrate_fundamentals(p, eta_zeta(eta), eta.case)
    xi = xi_data(eta, p, ZERO_REFLECTION, bd=bd)
    asym = asymptotic_locations(eta, p)
    sy = locate_state(eta, p, ZERO_REFLECTION, method)
    sx = locate_state(eta, p, RESONANCE, method, check_ball=False)
    r = abs(sx.z.imag - sy.z.imag)
    asserted = asym.distance_quotient < 2
    supR = supD = float("nan")
    cr = float("nan")
    R_center = complex("nan")
    if with_bounds:
        supR, supD = sup_on_disk(p, sy.z, r, sample_points)
        cr, grid = cauchy_riemann_residual(p, sy.z, r)
        R_center = grid[0, 0]
    return ComparisonReport(
        M=p.M, E=eta.E, k=eta.k, z_Y=sy.z, z_X=sx.z, asym_z_Y=asym.z_Y, asym_w_Y=asym.w_Y,
        asym_z_X=asym.z_X, split_defect=asym.split_defect, im_gap_predicted=asym.gap,
        distance_quotient=asym.distance_quotient, gamma_radius=r, sup_R_on_gamma=supR,
        sup_dR_on_gamma=supD, R_center=R_center, cauchy_riemann_residual=cr, N_eta=xi.N,
        bounds_asserted=asserted, state_Y=sy, state_X=sx,
    )


def fit_log_slope(xs, ys):
    """Least-squares slope and intercept of ``log|y|`` against ``x``."""
    coef = np.polyfit(np.asarray(xs, dtype=float), np.log(np.abs(np.asarray(ys))), 1)
    return float(coef[0]), float(coef[1])
