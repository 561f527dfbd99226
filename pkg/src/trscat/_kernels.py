"""Compiled Dormand-Prince 5(4) integrator for the linear Schrödinger systems.

All systems integrate ``y'' = (V(x) - z) y`` together with some companions:

* ``SYS_FUND``: ``[u, u', v, v', dw u, dw u', dz u, dz u', Iuu, Iuv]`` and
  optionally ``[dz2 u, dz2 u']``.
* ``SYS_SCAT``: ``[psi, psi', dz psi, dz psi']``.
* ``SYS_PLAIN``: ``[psi, psi']``.

The potential is a postfix program (see ``expr.compile_postfix``) or a
cubic spline table, so one compiled kernel serves every potential.
"""

import math

import numpy as np
from numba import njit

SYS_FUND = 0
SYS_SCAT = 1
SYS_PLAIN = 2

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2
STATUS_NONFINITE = 3

# Dormand-Prince 5(4) tableau.
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
A71, A73, A74, A75, A76 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

SAFETY = 0.9
BETA = 0.04
EXPO1 = 0.2 - BETA * 0.75
FAC_MIN = 0.2  # smallest shrink factor
FAC_MAX = 10.0  # largest growth factor


@njit(cache=True, nogil=True)
def potential_value(x, code, consts, sx0, sh, scoef, stack):
    sp = 0
    for i in range(code.shape[0] // 2):
        op = code[2 * i]
        if op == 0:
            stack[sp] = consts[code[2 * i + 1]]
            sp += 1
        elif op == 1:
            stack[sp] = x
            sp += 1
        elif op <= 6:
            b = stack[sp - 1]
            a = stack[sp - 2]
            sp -= 1
            if op == 2:
                stack[sp - 1] = a + b
            elif op == 3:
                stack[sp - 1] = a - b
            elif op == 4:
                stack[sp - 1] = a * b
            elif op == 5:
                stack[sp - 1] = a / b
            else:
                stack[sp - 1] = a**b
        elif op == 7:
            stack[sp - 1] = -stack[sp - 1]
        elif op == 8:
            stack[sp - 1] = math.cos(stack[sp - 1])
        elif op == 9:
            stack[sp - 1] = math.sin(stack[sp - 1])
        elif op == 10:
            stack[sp - 1] = math.tanh(stack[sp - 1])
        elif op == 11:
            stack[sp - 1] = math.exp(stack[sp - 1])
        elif op == 12:
            stack[sp - 1] = math.sqrt(stack[sp - 1]) if stack[sp - 1] >= 0.0 else np.nan
        elif op == 13:
            stack[sp - 1] = abs(stack[sp - 1])
        elif op == 20:
            m = scoef.shape[0]
            xc = min(max(x, sx0), sx0 + m * sh)
            j = int(math.floor((xc - sx0) / sh))
            if j > m - 1:
                j = m - 1
            if j < 0:
                j = 0
            d = xc - (sx0 + j * sh)
            stack[sp] = scoef[j, 0] + d * (scoef[j, 1] + d * (scoef[j, 2] + d * scoef[j, 3]))
            sp += 1
    return stack[0]


@njit(cache=True, nogil=True)
def _rhs(sysid, x, y, z, code, consts, sx0, sh, scoef, stack, out):
    q = potential_value(x, code, consts, sx0, sh, scoef, stack) - z
    out[0] = y[1]
    out[1] = q * y[0]
    if sysid == 0:
        out[2] = y[3]
        out[3] = q * y[2]
        out[4] = y[5]
        out[5] = q * y[4]
        out[6] = y[7]
        out[7] = q * y[6] - y[0]
        out[8] = y[0] * y[0]
        out[9] = y[0] * y[2]
        if y.shape[0] == 12:
            out[10] = y[11]
            out[11] = q * y[10] - 2.0 * y[6]
    elif sysid == 1:
        out[2] = y[3]
        out[3] = q * y[2] - y[0]


@njit(cache=True, nogil=True)
def _grow(xs, ys):
    cap = xs.shape[0] * 2
    nx = np.empty(cap)
    ny = np.empty((cap, ys.shape[1]), dtype=np.complex128)
    nx[: xs.shape[0]] = xs
    ny[: xs.shape[0]] = ys
    return nx, ny


@njit(cache=True, nogil=True)
def integrate(sysid, y0, x0, x1, z, code, consts, sx0, sh, scoef, rtol, atol, h0, mesh, max_steps):
    """Integrate from ``x0`` to ``x1``; returns ``(status, xs, ys, n_rejected)``.

    When ``mesh`` has more than one entry the step sequence is replayed
    without error control, which makes the discrete flow a smooth function
    of ``z`` and the initial data.
    """
    n = y0.shape[0]
    stack = np.empty(code.shape[0] // 2 + 2)
    xs = np.empty(256)
    ys = np.empty((256, n), dtype=np.complex128)
    xs[0] = x0
    ys[0, :] = y0
    count = 1
    nrej = 0
    y = y0.copy()
    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty(n, dtype=np.complex128)
    k3 = np.empty(n, dtype=np.complex128)
    k4 = np.empty(n, dtype=np.complex128)
    k5 = np.empty(n, dtype=np.complex128)
    k6 = np.empty(n, dtype=np.complex128)
    k7 = np.empty(n, dtype=np.complex128)
    yt = np.empty(n, dtype=np.complex128)
    ynew = np.empty(n, dtype=np.complex128)
    if x0 == x1:
        return STATUS_OK, xs[:1], ys[:1], 0
    direction = 1.0 if x1 > x0 else -1.0
    x = x0
    _rhs(sysid, x, y, z, code, consts, sx0, sh, scoef, stack, k1)

    fixed = mesh.shape[0] > 1
    h = h0 * direction
    errold = 1e-4
    step_index = 1
    while True:
        if fixed:
            if step_index >= mesh.shape[0]:
                break
            h = mesh[step_index] - x
            last = step_index == mesh.shape[0] - 1
        else:
            if count + nrej > max_steps:
                return STATUS_MAX_STEPS, xs[:count], ys[:count], nrej
            if abs(h) < 1e-14 * max(1.0, abs(x)):
                return STATUS_UNDERFLOW, xs[:count], ys[:count], nrej
            last = False
            if direction * (x + h - x1) >= 0.0:
                h = x1 - x
                last = True

        for i in range(n):
            yt[i] = y[i] + h * A21 * k1[i]
        _rhs(sysid, x + C2 * h, yt, z, code, consts, sx0, sh, scoef, stack, k2)
        for i in range(n):
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        _rhs(sysid, x + C3 * h, yt, z, code, consts, sx0, sh, scoef, stack, k3)
        for i in range(n):
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        _rhs(sysid, x + C4 * h, yt, z, code, consts, sx0, sh, scoef, stack, k4)
        for i in range(n):
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        _rhs(sysid, x + C5 * h, yt, z, code, consts, sx0, sh, scoef, stack, k5)
        for i in range(n):
            yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        _rhs(sysid, x + h, yt, z, code, consts, sx0, sh, scoef, stack, k6)
        for i in range(n):
            ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
        xnew = x1 if (last and not fixed) else x + h
        if fixed:
            xnew = mesh[step_index]
        _rhs(sysid, xnew, ynew, z, code, consts, sx0, sh, scoef, stack, k7)

        accept = True
        if not fixed:
            err = 0.0
            for i in range(n):
                e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
                sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
                r = abs(e) / sc
                err += r * r
            err = math.sqrt(err / n)
            if not math.isfinite(err):
                return STATUS_NONFINITE, xs[:count], ys[:count], nrej
            fac11 = err**EXPO1
            if err <= 1.0:
                fac = fac11 / errold**BETA
                fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFETY))
                errold = max(err, 1e-4)
                hnew = h / fac
            else:
                accept = False
                last = False
                hnew = h / min(1.0 / FAC_MIN, fac11 / SAFETY)
                nrej += 1
        if accept:
            x = xnew
            for i in range(n):
                y[i] = ynew[i]
                k1[i] = k7[i]
            if count == xs.shape[0]:
                xs, ys = _grow(xs, ys)
            xs[count] = x
            ys[count, :] = y
            count += 1
            step_index += 1
            if not fixed:
                for i in range(n):
                    if not (math.isfinite(y[i].real) and math.isfinite(y[i].imag)):
                        return STATUS_NONFINITE, xs[:count], ys[:count], nrej
            if last:
                break
        if not fixed:
            h = hnew
    return STATUS_OK, xs[:count], ys[:count], nrej
