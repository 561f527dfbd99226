"""Potential families, their truncation, and JSON configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from . import expr as ex
from .errors import DomainError, UsageError

# Tolerance defining the effective support radius of a decaying defect.
DEFECT_TOL = 1e-8


@dataclass(frozen=True)
class KernelProgram:
    """Potential in the form consumed by the compiled integrator."""

    code: np.ndarray
    consts: np.ndarray
    spline_x0: float = 0.0
    spline_h: float = 1.0
    spline_coef: np.ndarray = field(default_factory=lambda: np.zeros((1, 4)))

    def as_args(self):
        return self.code, self.consts, self.spline_x0, self.spline_h, self.spline_coef


class PotentialSpec:
    """Base class: an evaluable real potential with a defect radius."""

    kind = "abstract"

    def __call__(self, x):
        raise NotImplementedError

    @property
    def rho(self) -> float:
        raise NotImplementedError

    def program(self) -> KernelProgram:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError

    @property
    def is_even(self) -> bool:
        return False


def _program_from_ast(node):
    code, consts = ex.compile_postfix(node)
    return KernelProgram(code, consts)


@dataclass(frozen=True, kw_only=True)
class Expression(PotentialSpec):
    text: str
    rho_override: float | None = None
    kind = "expression"

    def __post_init__(self):
        object.__setattr__(self, "ast", ex.parse(self.text))

    def __call__(self, x):
        return ex.evaluate(self.ast, x)

    @cached_property
    def _radius(self):
        if self.rho_override is not None:
            return float(self.rho_override)
        r = estimate_defect_radius(self)
        return 0.0 if r is None else r

    @property
    def rho(self):
        return self._radius

    def program(self):
        return _program_from_ast(self.ast)

    @property
    def is_even(self):
        x = np.linspace(0.0, 20.0, 401)
        return bool(np.allclose(self(x), self(-x), rtol=0, atol=1e-13 * (1 + np.abs(self(x)).max())))

    def to_config(self):
        cfg = {"kind": self.kind, "text": self.text}
        if self.rho_override is not None:
            cfg["rho"] = self.rho_override
        return cfg


@dataclass(frozen=True, kw_only=True)
class CosineDefect(PotentialSpec):
    """``c0 + sum a cos(2 pi f x) + b tanh(x) cos(2 pi f_d x)``; frequencies in cycles per unit length."""

    c0: float
    cos_terms: tuple = ()
    defect_amplitude: float = 0.0
    defect_frequency: float = 0.0
    rho_override: float | None = None
    kind = "cosine_defect"

    def __post_init__(self):
        object.__setattr__(self, "cos_terms", tuple((float(a), float(f)) for a, f in self.cos_terms))

    def periodic_part(self, x):
        x = np.asarray(x, dtype=float)
        out = self.c0 + 0.0 * x
        for a, f in self.cos_terms:
            out = out + a * np.cos(2 * math.pi * f * x)
        return out

    def background(self, x, side):
        """Periodic background on one side: ``tanh`` replaced by ``side`` (+1 or -1)."""
        x = np.asarray(x, dtype=float)
        return self.periodic_part(x) + side * self.defect_amplitude * np.cos(
            2 * math.pi * self.defect_frequency * x
        )

    def defect_part(self, x):
        return self(x) - self.background(x, np.sign(x))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.periodic_part(x) + self.defect_amplitude * np.tanh(x) * np.cos(
            2 * math.pi * self.defect_frequency * x
        )

    @property
    def rho(self):
        if self.rho_override is not None:
            return float(self.rho_override)
        b = abs(self.defect_amplitude)
        if b <= DEFECT_TOL:
            return 0.0
        # |b| (1 - tanh r) < tol
        return float(math.atanh(1.0 - DEFECT_TOL / b))

    def text(self):
        parts = [repr(float(self.c0))]
        for a, f in self.cos_terms:
            parts.append(f"{a!r}*cos({2 * f!r}*pi*x)")
        if self.defect_amplitude:
            parts.append(
                f"{self.defect_amplitude!r}*tanh(x)*cos({2 * self.defect_frequency!r}*pi*x)"
            )
        return "+".join(parts)

    def program(self):
        return _program_from_ast(ex.parse(self.text()))

    def to_config(self):
        cfg = {
            "kind": self.kind,
            "c0": self.c0,
            "cos_terms": [list(t) for t in self.cos_terms],
            "defect_amplitude": self.defect_amplitude,
            "defect_frequency": self.defect_frequency,
        }
        if self.rho_override is not None:
            cfg["rho"] = self.rho_override
        return cfg


@dataclass(frozen=True, kw_only=True)
class HarmonicOffset(PotentialSpec):
    """``c0 + x^2``."""

    c0: float = 1.0
    kind = "harmonic"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.c0 + x * x

    @property
    def rho(self):
        return 0.0

    @property
    def is_even(self):
        return True

    def program(self):
        return _program_from_ast(ex.parse(f"{self.c0!r}+x*x"))

    def to_config(self):
        return {"kind": self.kind, "c0": self.c0}


@dataclass(frozen=True, kw_only=True)
class SquareWell(PotentialSpec):
    """Constant ``-depth``; the truncation half-width sets the well edges."""

    depth: float
    kind = "square_well"

    def __call__(self, x):
        return -self.depth + 0.0 * np.asarray(x, dtype=float)

    @property
    def rho(self):
        return 0.0

    @property
    def is_even(self):
        return True

    def program(self):
        return _program_from_ast(ex.Num(-float(self.depth)))

    def to_config(self):
        return {"kind": self.kind, "depth": self.depth}


@dataclass(frozen=True, kw_only=True)
class Sampled(PotentialSpec):
    """Values on a uniform grid, cubic-spline interpolated, held constant past the ends."""

    h: float
    values: tuple
    x0: float | None = None
    rho_override: float | None = None
    kind = "sampled"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 4:
            raise UsageError("sampled potential needs at least 4 values")
        if not np.all(np.isfinite(vals)) or not self.h > 0:
            raise UsageError("sampled potential needs finite values and h > 0")
        object.__setattr__(self, "values", tuple(vals.tolist()))
        if self.x0 is None:
            object.__setattr__(self, "x0", -0.5 * (vals.size - 1) * self.h)
        grid = self.x0 + self.h * np.arange(vals.size)
        object.__setattr__(self, "_spline", CubicSpline(grid, vals, bc_type="natural"))
        object.__setattr__(self, "_grid", grid)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, self._grid[0], self._grid[-1])
        return self._spline(xc)

    @cached_property
    def _radius(self):
        if self.rho_override is not None:
            return float(self.rho_override)
        r = estimate_defect_radius(self, extent=min(-self._grid[0], self._grid[-1]))
        return 0.0 if r is None else r

    @property
    def rho(self):
        return self._radius

    def program(self):
        # CubicSpline.c has shape (4, n-1), highest power first.
        coef = np.ascontiguousarray(self._spline.c.T[:, ::-1])
        code = np.array([ex.OP_SPLINE, 0], dtype=np.int64)
        return KernelProgram(code, np.zeros(1), float(self.x0), float(self.h), coef)

    def to_config(self):
        cfg = {"kind": self.kind, "h": self.h, "values": list(self.values), "x0": self.x0}
        if self.rho_override is not None:
            cfg["rho"] = self.rho_override
        return cfg


def estimate_defect_radius(v, period=1.0, tol=DEFECT_TOL, extent=40.0, harmonics=12):
    """Smallest r with the tails within ``tol`` of a period-``period`` fit.

    Each tail is fitted by least squares with a truncated Fourier series on its
    outermost two periods. Returns None when a tail is not periodic.
    """
    radii = []
    for side in (1.0, -1.0):
        far = extent
        xf = side * np.linspace(far - 2 * period, far, 257)
        basis = _fourier_basis(xf, period, harmonics)
        coef, *_ = np.linalg.lstsq(basis, v(xf), rcond=None)
        xs = side * np.linspace(0.0, far, int(far * 64) + 1)
        resid = np.abs(v(xs) - _fourier_basis(xs, period, harmonics) @ coef)
        scale = max(1.0, float(np.abs(v(xf)).max()))
        if resid[-300:].max() > tol * scale:
            return None
        bad = np.nonzero(resid >= tol * scale)[0]
        radii.append(0.0 if bad.size == 0 else float(abs(xs[bad[-1]])))
    return max(radii)


def _fourier_basis(x, period, harmonics):
    w = 2 * math.pi / period
    cols = [np.ones_like(x)]
    for m in range(1, harmonics + 1):
        cols.append(np.cos(m * w * x))
        cols.append(np.sin(m * w * x))
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class TruncatedPotential:
    """``inner`` on ``[-M, M]`` and zero outside."""

    inner: PotentialSpec
    M: float

    def __post_init__(self):
        if isinstance(self.inner, TruncatedPotential):
            if self.M != self.inner.M:
                raise DomainError("retruncation must use the same half-width")
            object.__setattr__(self, "inner", self.inner.inner)
        if not (math.isfinite(self.M) and self.M > 0):
            raise DomainError(f"truncation half-width must be positive, got {self.M}")
        if not self.M > self.inner.rho:
            raise DomainError(
                f"truncation half-width M={self.M} must exceed the defect radius {self.inner.rho:.6g}"
            )

    @property
    def rho(self):
        return self.inner.rho

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= self.M, self.inner(x), 0.0)

    def with_M(self, M):
        return TruncatedPotential(self.inner, M)

    def to_config(self):
        return {**self.inner.to_config(), "M": self.M}


def eval_truncated(p: TruncatedPotential, x):
    return p(x)


def parse_expression(text: str) -> Expression:
    return Expression(text=text)


_KINDS = {"expression", "cosine_defect", "harmonic", "square_well", "sampled"}


def spec_from_config(cfg: dict) -> PotentialSpec:
    if not isinstance(cfg, dict):
        raise UsageError("potential config must be a JSON object")
    kind = cfg.get("kind")
    if kind not in _KINDS:
        raise UsageError(f"unknown potential kind {kind!r}; expected one of {sorted(_KINDS)}")
    rho = cfg.get("rho")
    try:
        if kind == "expression":
            return Expression(text=str(cfg["text"]), rho_override=rho)
        if kind == "cosine_defect":
            return CosineDefect(
                c0=float(cfg["c0"]),
                cos_terms=tuple(tuple(t) for t in cfg.get("cos_terms", ())),
                defect_amplitude=float(cfg.get("defect_amplitude", 0.0)),
                defect_frequency=float(cfg.get("defect_frequency", 0.0)),
                rho_override=rho,
            )
        if kind == "harmonic":
            return HarmonicOffset(c0=float(cfg.get("c0", 0.0)))
        if kind == "square_well":
            return SquareWell(depth=float(cfg["depth"]))
        return Sampled(h=float(cfg["h"]), values=tuple(cfg["values"]), x0=cfg.get("x0"), rho_override=rho)
    except KeyError as e:
        raise UsageError(f"potential config of kind {kind!r} is missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise UsageError(f"malformed potential config: {e}") from None


def potential_from_config(cfg: dict) -> TruncatedPotential:
    spec = spec_from_config(cfg)
    if "M" not in cfg:
        raise UsageError("potential config needs a truncation half-width 'M'")
    try:
        M = float(cfg["M"])
    except (TypeError, ValueError):
        raise UsageError("'M' must be a number") from None
    return TruncatedPotential(spec, M)


def figure1_potential(M=10.0, rho=3.0):
    """The cosine defect potential with a gap state near 19.8."""
    spec = CosineDefect(
        c0=10.0, cos_terms=((5.0, 2.0),), defect_amplitude=5.0, defect_frequency=1.0, rho_override=rho
    )
    return TruncatedPotential(spec, M)


def harmonic_potential(M, c0=1.0):
    return TruncatedPotential(HarmonicOffset(c0=c0), M)
