"""Fundamental solutions at complex (w, z) and their variational derivatives."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from . import ode
from .boundstate import NODAL, NONNODAL
from .errors import DomainError

COMPONENTS = ("u", "du", "v", "dv", "dwu", "dwdu", "dzu", "dzdu", "Iuu", "Iuv", "dz2u", "dz2du")


@dataclass(frozen=True)
class Zeta:
    w: complex
    z: complex

    def __post_init__(self):
        object.__setattr__(self, "w", complex(self.w))
        object.__setattr__(self, "z", complex(self.z))

    def as_array(self):
        return np.array([self.w, self.z])

    @classmethod
    def from_array(cls, a):
        return cls(a[0], a[1])


def initial_conditions(case, w, second_order=False):
    """State vector at ``x = 0`` in the component order of :data:`COMPONENTS`."""
    w = complex(w)
    d = 1.0 + w * w
    if abs(d) < 1e-14:
        raise DomainError(f"normalization is singular at w={w} (1 + w^2 = 0)")
    if case == NONNODAL:
        head = [1.0, w, -w / d, 1.0 / d, 0.0, 1.0]
    elif case == NODAL:
        head = [-w, 1.0, -1.0 / d, -w / d, -1.0, 0.0]
    else:
        raise ValueError(f"unknown normalization case {case!r}")
    y = head + [0.0, 0.0, 0.0, 0.0]
    if second_order:
        y += [0.0, 0.0]
    return np.array(y, dtype=np.complex128)


@dataclass(frozen=True)
class SideValues:
    """Every component at one end, ``x = +M`` or ``x = -M``."""

    x: float
    u: complex
    du: complex
    v: complex
    dv: complex
    dwu: complex
    dwdu: complex
    dzu: complex
    dzdu: complex
    Iuu: complex
    Iuv: complex
    dz2u: complex = complex("nan")
    dz2du: complex = complex("nan")

    @classmethod
    def from_state(cls, x, y):
        return cls(float(x), *[complex(c) for c in y])

    @property
    def wronskian(self):
        return self.u * self.dv - self.du * self.v


@dataclass(frozen=True)
class BoundaryData:
    zeta: Zeta
    case: str
    M: float
    plus: SideValues
    minus: SideValues
    meshes: tuple
    trajectories: tuple | None = None

    @property
    def int_u2_right(self):
        return self.plus.Iuu

    @property
    def int_u2_left(self):
        return -self.minus.Iuu

    @property
    def int_u2(self):
        return self.int_u2_right + self.int_u2_left

    def side(self, sign):
        return self.plus if sign > 0 else self.minus


def integrate_fundamentals(p, zeta: Zeta, case, meshes=None, second_order=False, keep=False,
                           rtol=ode.RTOL, atol=ode.ATOL):
    """Integrate the fundamental system from 0 to ``+M`` and to ``-M``.

    ``meshes`` replays a previous step sequence (pair of arrays for the two
    half-lines) so that the result is a smooth function of ``zeta``.
    """
    program = p.inner.program()
    y0 = initial_conditions(case, zeta.w, second_order)
    sides = []
    trs = []
    for j, end in enumerate((p.M, -p.M)):
        mesh = None if meshes is None else meshes[j]
        tr = ode.integrate(K.SYS_FUND, program, y0, 0.0, end, zeta.z, mesh=mesh, rtol=rtol, atol=atol)
        sides.append(SideValues.from_state(end, tr.final))
        trs.append(tr)
    return BoundaryData(
        zeta=zeta, case=case, M=p.M, plus=sides[0], minus=sides[1],
        meshes=(trs[0].xs, trs[1].xs), trajectories=tuple(trs) if keep else None,
    )


def wronskian_defect(bd: BoundaryData, checkpoints=16):
    """Largest ``|u v' - u' v - 1|`` over checkpoints spread along both half-lines."""
    if bd.trajectories is None:
        raise ValueError("boundary data was computed without trajectories")
    worst = 0.0
    for tr in bd.trajectories:
        idx = np.unique(np.linspace(0, tr.xs.size - 1, checkpoints).round().astype(int))
        y = tr.ys[idx]
        wr = y[:, 0] * y[:, 3] - y[:, 1] * y[:, 2]
        worst = max(worst, float(np.abs(wr - 1.0).max()))
    return worst


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def identity_residuals(bd: BoundaryData):
    """Relative residuals of the closed-form derivative identities at both ends.

    ``dz`` checks ``dz u = Iuv u - Iuu v`` (and the derivative analogue);
    ``dw`` checks ``dw u = w/(1+w^2) u + v``.
    """
    w = bd.zeta.w
    out = {"dz": 0.0, "dw": 0.0}
    for s in (bd.plus, bd.minus):
        out["dz"] = max(out["dz"], _rel(s.Iuv * s.u - s.Iuu * s.v, s.dzu), _rel(s.Iuv * s.du - s.Iuu * s.dv, s.dzdu))
        c = w / (1.0 + w * w)
        out["dw"] = max(out["dw"], _rel(c * s.u + s.v, s.dwu), _rel(c * s.du + s.dv, s.dwdu))
    return out


def variational_check(p, zeta: Zeta, case, delta=1e-5):
    """Compare variational derivatives with central differences in ``w`` and ``z``."""
    if not 1e-7 <= delta <= 1e-4:
        raise ValueError("delta must lie in [1e-7, 1e-4]")
    base = integrate_fundamentals(p, zeta, case)
    report = {}
    for name, step in (("w", Zeta(delta, 0)), ("z", Zeta(0, delta))):
        hi = integrate_fundamentals(p, Zeta(zeta.w + step.w, zeta.z + step.z), case, meshes=base.meshes)
        lo = integrate_fundamentals(p, Zeta(zeta.w - step.w, zeta.z - step.z), case, meshes=base.meshes)
        err = 0.0
        for sgn in (1, -1):
            b, h, l = base.side(sgn), hi.side(sgn), lo.side(sgn)
            for comp, dcomp in (("u", "u"), ("du", "du")):
                exact = getattr(b, f"d{name}{dcomp}" if dcomp == "u" else f"d{name}du")
                fd = (getattr(h, comp) - getattr(l, comp)) / (2 * delta)
                err = max(err, _rel(fd, exact))
        report[name] = err
    report["max"] = max(report["w"], report["z"])
    return report


def dump_trajectory(bd: BoundaryData, path):
    """Write both half-line trajectories as CSV: x then real and imaginary parts of each component."""
    if bd.trajectories is None:
        raise ValueError("boundary data was computed without trajectories")
    n = bd.trajectories[0].ys.shape[1]
    names = COMPONENTS[:n]
    header = ["x"] + [f"{part}_{c}" for c in names for part in ("re", "im")]
    rows = []
    for j, tr in enumerate((bd.trajectories[1], bd.trajectories[0])):
        order = np.argsort(tr.xs)
        if j == 1:
            order = order[1:]  # x = 0 already written
        for i in order:
            row = [tr.xs[i]]
            for c in tr.ys[i]:
                row += [c.real, c.imag]
            rows.append(row)
    rows.sort(key=lambda r: r[0])
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for r in rows:
            wr.writerow([f"{v:.16e}" for v in r])
