"""Thin Python layer over the compiled integrator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import IntegrationError

RTOL = 1e-10
ATOL = 1e-12
H0 = 1e-3
MAX_STEPS = 2_000_000

_NO_MESH = np.zeros(0)


@dataclass(frozen=True)
class Trajectory:
    xs: np.ndarray
    ys: np.ndarray
    rejected: int

    @property
    def final(self):
        return self.ys[-1]

    @property
    def mesh(self):
        return self.xs


def integrate(system, program, y0, x0, x1, z, mesh=None, rtol=RTOL, atol=ATOL, h0=H0):
    """Integrate ``system`` for the potential ``program`` from ``x0`` to ``x1`` at energy ``z``."""
    y0 = np.ascontiguousarray(y0, dtype=np.complex128)
    m = _NO_MESH if mesh is None else np.ascontiguousarray(mesh, dtype=np.float64)
    status, xs, ys, nrej = K.integrate(
        system, y0, float(x0), float(x1), complex(z), *program.as_args(),
        float(rtol), float(atol), float(h0), m, MAX_STEPS,
    )
    if status != K.STATUS_OK:
        reason = {
            K.STATUS_UNDERFLOW: "step size underflow",
            K.STATUS_MAX_STEPS: "step budget exhausted",
            K.STATUS_NONFINITE: "non-finite solution",
        }[status]
        raise IntegrationError(f"integration from {x0} to {x1} at z={z} failed: {reason} near x={xs[-1]:.6g}")
    return Trajectory(xs, ys, int(nrej))
