"""Uniform grids on [0, pi], sampled complex functions and trapezoid quadrature.

Every other module works with pointwise samples on the grid ``x_i = i*pi/n``.
Integrals of the form ``int_0^x`` are evaluated with the composite trapezoid
rule, which keeps all marching schemes second order.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Literal

import numpy as np

from .errors import GridMismatchError, InputError

TailConvention = Literal["asymptotic", "squares"]


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n`` intervals on [0, pi]."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InputError(f"grid needs a positive number of intervals, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def step(self) -> float:
        return math.pi / self.n

    @cached_property
    def points(self) -> np.ndarray:
        x = np.arange(self.n + 1) * self.step
        x[-1] = math.pi
        x.flags.writeable = False
        return x

    @property
    def size(self) -> int:
        return self.n + 1

    def index_upto(self, x: float) -> int:
        """Largest grid index with ``x_i <= x`` (small rounding slack)."""
        return int(math.floor(x / self.step + 1e-9))

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> "SampledFunction":
        values = np.broadcast_to(np.asarray(func(self.points), dtype=complex), (self.size,))
        return SampledFunction(self, values)

    def constant(self, c: complex) -> "SampledFunction":
        return SampledFunction(self, np.full(self.size, c, dtype=complex))

    def zeros(self) -> "SampledFunction":
        return self.constant(0.0)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Complex samples of a function at every node of ``grid``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex, copy=True)
        if v.shape != (self.grid.size,):
            raise InputError(
                f"expected {self.grid.size} samples for n={self.grid.n}, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise InputError(f"non-finite sample at index {bad}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    def check_same_grid(self, other: "SampledFunction") -> None:
        if self.grid != other.grid:
            raise GridMismatchError(f"grid n={self.grid.n} vs n={other.grid.n}")

    def with_values(self, values: np.ndarray) -> "SampledFunction":
        return SampledFunction(self.grid, values)

    def reflected(self) -> "SampledFunction":
        """Samples of ``x -> f(pi - x)``; the grid is symmetric so this is index reversal."""
        return SampledFunction(self.grid, self.values[::-1])

    def __add__(self, other):
        if isinstance(other, SampledFunction):
            self.check_same_grid(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, SampledFunction):
            self.check_same_grid(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, other):
        if isinstance(other, SampledFunction):
            self.check_same_grid(other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * other)

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return self.with_values(-self.values)


@dataclass(frozen=True)
class BoundaryCoefficients:
    """Robin coefficients: ``y'(0) - h y(0) = 0`` and ``y'(pi) + H y(pi) = 0``."""

    h: complex = 0.0
    H: complex = 0.0

    def __post_init__(self):
        for name in ("h", "H"):
            value = complex(getattr(self, name))
            if not cmath.isfinite(value):
                raise InputError(f"boundary coefficient {name} must be finite")
            object.__setattr__(self, name, value)


def canonical_rho(rho: complex) -> complex:
    """Pick the square-root branch with Re >= 0, and Im >= 0 on the imaginary axis."""
    rho = complex(rho)
    if rho.real < 0 or (rho.real == 0 and rho.imag < 0):
        rho = -rho
    return rho


@dataclass(frozen=True)
class SpectralPoint:
    """Spectral parameter ``lam`` together with its branch-fixed root ``rho``."""

    lam: complex
    rho: complex

    @classmethod
    def from_lambda(cls, lam: complex) -> "SpectralPoint":
        lam = complex(lam)
        return cls(lam, canonical_rho(cmath.sqrt(lam)))

    @classmethod
    def from_rho(cls, rho: complex) -> "SpectralPoint":
        rho = canonical_rho(rho)
        return cls(rho * rho, rho)


def as_spectral_point(value) -> SpectralPoint:
    if isinstance(value, SpectralPoint):
        return value
    return SpectralPoint.from_lambda(value)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues ``lambda_k`` for ``k = 0..K`` plus the convention used beyond ``K``.

    ``tail="squares"`` means ``lambda_k = k**2`` for ``k > K``.  ``tail="asymptotic"``
    extrapolates ``rho_k = k + c1/k + (c3 + e3*(-1)**k)/k**3`` with coefficients
    fitted to the last quarter of the stored eigenvalues (see
    :func:`convspec.reconstruction.tail_model`).
    """

    values: np.ndarray
    tail: TailConvention = "asymptotic"

    def __post_init__(self):
        v = np.array(self.values, dtype=complex, copy=True).reshape(-1)
        if v.size < 2:
            raise InputError("a spectrum needs at least lambda_0 and lambda_1")
        if not np.all(np.isfinite(v)):
            raise InputError("spectrum contains non-finite eigenvalues")
        if self.tail not in ("asymptotic", "squares"):
            raise InputError(f"unknown tail convention {self.tail!r}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def K(self) -> int:
        return self.values.size - 1

    @property
    def rho(self) -> np.ndarray:
        r = np.sqrt(self.values)
        flip = (r.real < 0) | ((r.real == 0) & (r.imag < 0))
        return np.where(flip, -r, r)

    @property
    def kappa(self) -> np.ndarray:
        """``kappa_k = rho_k - k``; square-summable for spectra of the operator."""
        return self.rho - np.arange(self.K + 1)

    def truncated(self, K: int) -> "Spectrum":
        return Spectrum(self.values[: K + 1], self.tail)

    def value(self, k: int) -> complex:
        """``lambda_k`` for any ``k``; beyond ``K`` only the squares convention is literal."""
        if k <= self.K:
            return complex(self.values[k])
        return complex(k * k)

    @classmethod
    def unperturbed(cls, K: int, tail: TailConvention = "squares") -> "Spectrum":
        return cls(np.arange(K + 1, dtype=float) ** 2, tail)


def trapezoid_weights(upto: int) -> np.ndarray:
    w = np.ones(upto + 1)
    w[0] = w[-1] = 0.5
    if upto == 0:
        w[0] = 0.0
    return w


def quad_trapezoid(f: SampledFunction, upto: int | None = None) -> complex:
    """Composite trapezoid approximation of ``int_0^{x_upto} f``."""
    n = f.grid.n
    if upto is None:
        upto = n
    if not 0 <= upto <= n:
        raise IndexError(f"upto={upto} outside 0..{n}")
    v = f.values[: upto + 1]
    return complex(f.grid.step * (v @ trapezoid_weights(upto)))


def cumulative_trapezoid(values: np.ndarray, step: float, axis: int = -1) -> np.ndarray:
    """Running trapezoid integral along ``axis`` starting at zero."""
    v = np.asarray(values)
    v = np.moveaxis(v, axis, -1)
    out = np.zeros(v.shape, dtype=np.result_type(v, float))
    out[..., 1:] = np.cumsum(0.5 * step * (v[..., 1:] + v[..., :-1]), axis=-1)
    return np.moveaxis(out, -1, axis)


def l2_norm(values: np.ndarray, grid: Grid, upto: int | None = None) -> float:
    """Trapezoid L2 norm of samples on ``[0, x_upto]``."""
    if upto is None:
        upto = grid.n
    v = np.abs(np.asarray(values)[: upto + 1]) ** 2
    return math.sqrt(grid.step * float(v @ trapezoid_weights(upto)))


__all__ = [
    "BoundaryCoefficients",
    "Grid",
    "SampledFunction",
    "SpectralPoint",
    "Spectrum",
    "TailConvention",
    "as_spectral_point",
    "canonical_rho",
    "cumulative_trapezoid",
    "l2_norm",
    "quad_trapezoid",
    "trapezoid_weights",
]
