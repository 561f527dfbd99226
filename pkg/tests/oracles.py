"""Closed-form references independent of the integrator."""

import cmath


def square_well_rt(z, depth, a):
    """Left-incidence R, T for V = -depth on [-a, a] and zero outside."""
    k = cmath.sqrt(z)
    q = cmath.sqrt(z + depth)
    s, c = cmath.sin(2 * q * a), cmath.cos(2 * q * a)
    T = cmath.exp(-2j * k * a) / (c - 1j * (k * k + q * q) / (2 * k * q) * s)
    R = 1j * (q * q - k * k) / (2 * k * q) * s * T
    return R, T
