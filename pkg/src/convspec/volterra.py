"""Convolution algebra on [0, pi] and the transformation-operator kernels.

The auxiliary function ``N`` determines the convolution kernel ``M`` through

    M(x) = 2 N(x) - int_0^x dt int_0^t N(t - tau) N(tau) dtau,

and the transformation kernel ``P(x, t) = sum_nu (x - t)**nu / nu! * N^{*nu}(t)``.
All integrals use trapezoid product quadrature on the uniform grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InputError
from .grid import Grid, SampledFunction, SpectralPoint, as_spectral_point, cumulative_trapezoid

DEFAULT_SERIES_TOL = 1e-12
MAX_NU = 200


def conv_values(a: np.ndarray, b: np.ndarray, step: float) -> np.ndarray:
    """Trapezoid product rule for ``int_0^{x_i} a(x_i - t) b(t) dt`` at every node."""
    m = a.size
    c = np.convolve(a, b)[:m]
    c = c - 0.5 * (a * b[0] + a[0] * b)
    c[0] = 0.0
    return step * c


def conv(a: SampledFunction, b: SampledFunction) -> SampledFunction:
    a.check_same_grid(b)
    return a.with_values(conv_values(a.values, b.values, a.grid.step))


@dataclass(frozen=True, eq=False)
class ConvPowerStack:
    """Convolution powers ``N^{*nu}`` for ``nu = 1..nu_max``; row ``nu-1`` holds power ``nu``."""

    base: SampledFunction
    powers: np.ndarray

    @property
    def nu_max(self) -> int:
        return self.powers.shape[0]

    @property
    def grid(self) -> Grid:
        return self.base.grid

    def power(self, nu: int) -> SampledFunction:
        if not 1 <= nu <= self.nu_max:
            raise IndexError(f"power {nu} outside 1..{self.nu_max}")
        return self.base.with_values(self.powers[nu - 1])

    def tail_bound(self) -> float:
        """``pi**nu / nu! * max|N^{*nu}|`` for the last stored power."""
        nu = self.nu_max
        return math.pi**nu / math.factorial(nu) * float(np.max(np.abs(self.powers[-1])))


def conv_powers(N: SampledFunction, nu_max: int | None = None, tol: float = DEFAULT_SERIES_TOL) -> ConvPowerStack:
    """Stack of convolution powers of ``N``.

    With ``nu_max=None`` the stack grows until ``pi**nu/nu! * max|N^{*nu}| < tol``.
    """
    if nu_max is not None and nu_max < 1:
        raise InputError(f"nu_max must be >= 1, got {nu_max}")
    step = N.grid.step
    rows = [np.array(N.values)]
    limit = nu_max if nu_max is not None else MAX_NU
    log_term = 0.0  # log(pi**nu / nu!)
    while len(rows) < limit:
        nu = len(rows)
        log_term += math.log(math.pi / nu)
        if nu_max is None and math.exp(log_term) * float(np.max(np.abs(rows[-1]))) < tol:
            break
        rows.append(conv_values(N.values, rows[-1], step))
    return ConvPowerStack(N, np.array(rows))


def _ensure_stack(N: SampledFunction, nu_max, tol, stack=None) -> ConvPowerStack:
    if stack is not None:
        return stack
    return conv_powers(N, nu_max, tol)


def n_to_m(N: SampledFunction) -> SampledFunction:
    step = N.grid.step
    inner = conv_values(N.values, N.values, step)
    return N.with_values(2.0 * N.values - cumulative_trapezoid(inner, step))


def m_to_n(M: SampledFunction) -> SampledFunction:
    """Invert :func:`n_to_m` by marching.

    At node ``i`` the discrete relation is affine in ``N(x_i)`` (the self term
    enters the double integral with weight ``step**2 / 2``), so each node is
    solved exactly; the result reproduces ``M`` through :func:`n_to_m` to
    rounding.
    """
    n = M.grid.n
    step = M.grid.step
    m = M.values
    N = np.zeros(n + 1, dtype=complex)
    N[0] = m[0] / 2.0
    c_prev = 0.0 + 0.0j  # (N*N)(x_{i-1})
    G_prev = 0.0 + 0.0j  # int_0^{x_{i-1}} (N*N)
    half_s2 = 0.5 * step * step
    for i in range(1, n + 1):
        inner = N[1:i] @ N[i - 1 : 0 : -1] if i > 1 else 0.0
        denom = 2.0 - half_s2 * N[0]
        if abs(denom) < 1e-12:
            raise ConvergenceError("degenerate marching step in m_to_n", index=i)
        N[i] = (m[i] + G_prev + 0.5 * step * c_prev + half_s2 * inner) / denom
        c_i = step * (inner + N[0] * N[i])
        G_prev = G_prev + 0.5 * step * (c_prev + c_i)
        c_prev = c_i
    return M.with_values(N)


@dataclass(frozen=True, eq=False)
class TriangularKernel:
    """Samples ``v[i, j] = P(x_i, t_j)`` for ``j <= i``; entries above the diagonal are zero."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex, copy=True)
        size = self.grid.size
        if v.shape != (size, size):
            raise InputError(f"triangular kernel needs shape {(size, size)}, got {v.shape}")
        v[np.triu_indices(size, 1)] = 0.0
        if not np.all(np.isfinite(v)):
            raise InputError("triangular kernel has non-finite entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def row(self, i: int) -> np.ndarray:
        return self.values[i, : i + 1]

    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.values).copy()


def _lower_mask(size: int) -> np.ndarray:
    return np.tril(np.ones((size, size), dtype=bool))


def transformation_kernel(
    N: SampledFunction, nu_max: int | None = None, tol: float = DEFAULT_SERIES_TOL, *, stack=None
) -> TriangularKernel:
    stack = _ensure_stack(N, nu_max, tol, stack)
    P, _ = _kernel_and_x_derivative(stack)
    return TriangularKernel(N.grid, P)


def _kernel_and_x_derivative(stack: ConvPowerStack):
    x = stack.grid.points
    D = np.where(_lower_mask(x.size), x[:, None] - x[None, :], 0.0)
    P = np.zeros(D.shape, dtype=complex)
    Px = np.zeros(D.shape, dtype=complex)
    prev = np.ones_like(D)  # D**(nu-1) / (nu-1)!
    for nu in range(1, stack.nu_max + 1):
        row = stack.powers[nu - 1][None, :]
        Px += prev * row
        prev = prev * D / nu
        P += prev * row
    return P, Px


@dataclass(frozen=True, eq=False)
class KernelSlices:
    """``P(pi, x)``, ``R(pi, x)``, ``Q(pi, x)`` and ``K(pi, x)`` on the grid."""

    P: SampledFunction
    R: SampledFunction
    Q: SampledFunction
    K: SampledFunction


def kernels_at_pi(
    N: SampledFunction, nu_max: int | None = None, tol: float = DEFAULT_SERIES_TOL, *, stack=None
) -> KernelSlices:
    stack = _ensure_stack(N, nu_max, tol, stack)
    grid = N.grid
    step = grid.step
    x = grid.points
    a = math.pi - x
    P = np.zeros(x.size, dtype=complex)
    R = np.ones(x.size, dtype=complex)
    Q = np.ones(x.size, dtype=complex)
    K = x.astype(complex)
    a_pow_prev = np.ones_like(a)  # a**(nu-1)
    for nu in range(1, stack.nu_max + 1):
        Nv = stack.powers[nu - 1]
        fact = math.factorial(nu)
        a_pow = a_pow_prev * a
        g = a_pow * Nv / fact
        P += g
        gd = nu * a_pow_prev * Nv / fact
        Tg = cumulative_trapezoid(g, step)
        R += Tg + x * cumulative_trapezoid(gd, step) - cumulative_trapezoid(x * gd, step)
        Q += a_pow / fact * cumulative_trapezoid(Nv, step)
        K += x * Tg - cumulative_trapezoid(x * g, step)
        a_pow_prev = a_pow
    return KernelSlices(*(N.with_values(v) for v in (P, R, Q, K)))


@dataclass(frozen=True, eq=False)
class RepresentationKernels:
    """Full triangular kernels ``P, P_x, K, R, Q`` built from one ``N``."""

    P: TriangularKernel
    Px: TriangularKernel
    K: TriangularKernel
    R: TriangularKernel
    Q: TriangularKernel

    @property
    def grid(self) -> Grid:
        return self.P.grid


def representation_kernels(
    N: SampledFunction, nu_max: int | None = None, tol: float = DEFAULT_SERIES_TOL, *, stack=None
) -> RepresentationKernels:
    """Kernels of the sine-transform representations of ``S, S', C, C'``.

    ``K(x,t) = t + int_0^t (t - tau) P(x,tau) dtau``,
    ``R(x,t) = 1 + int_0^t P(x,tau) dtau + int_0^t (t - tau) P_x(x,tau) dtau``,
    ``Q(x,t) = 1 + int_0^t P(x - t + tau, tau) dtau``.
    """
    stack = _ensure_stack(N, nu_max, tol, stack)
    grid = N.grid
    step = grid.step
    t = grid.points
    P, Px = _kernel_and_x_derivative(stack)
    TP = cumulative_trapezoid(P, step, axis=1)
    K = t[None, :] * (1.0 + TP) - cumulative_trapezoid(t[None, :] * P, step, axis=1)
    R = 1.0 + TP + t[None, :] * cumulative_trapezoid(Px, step, axis=1) - cumulative_trapezoid(
        t[None, :] * Px, step, axis=1
    )
    size = grid.size
    Q = np.zeros((size, size), dtype=complex)
    for d in range(size):
        diag = np.diagonal(P, offset=-d)
        q = 1.0 + cumulative_trapezoid(diag, step)
        rows = np.arange(d, size)
        Q[rows, rows - d] = q
    return RepresentationKernels(*(TriangularKernel(grid, v) for v in (P, Px, K, R, Q)))


def _rho_sine_transform(kern: TriangularKernel, sp: SpectralPoint) -> np.ndarray:
    """``rho int_0^{x_i} kern(x_i, t) sin(rho (x_i - t)) dt`` for every row ``i``.

    The row is integrated exactly as a piecewise-linear function of ``t``; after
    one integration by parts

        rho int = k(x) - k(0) cos(rho x) - sum_j (k_{j+1} - k_j) cos(rho (x - t_j^mid)) sinc,

    which stays accurate for every ``rho`` including ``rho -> 0``.
    """
    grid = kern.grid
    x = grid.points
    v = kern.values
    size = grid.size
    mid = 0.5 * (x[1:] + x[:-1])
    dk = np.diff(v, axis=1)  # (size, size-1): segment j between t_j and t_{j+1}
    seg_mask = np.arange(size - 1)[None, :] < np.arange(size)[:, None]
    arg = sp.rho * np.where(seg_mask, x[:, None] - mid[None, :], 0.0)
    body = np.sum(np.where(seg_mask, dk * np.cos(arg), 0.0), axis=1) * np.sinc(sp.rho * grid.step / (2 * math.pi))
    out = np.diagonal(v) - v[:, 0] * np.cos(sp.rho * x) - body
    out[0] = 0.0
    return out


def _pick(values: np.ndarray, i):
    return values if i is None else complex(values[i])


def eval_S(kernels: RepresentationKernels, sp, i: int | None = None):
    """``S(x, lam) = K(x,x) - rho int_0^x K(x,t) sin rho(x-t) dt``."""
    sp = as_spectral_point(sp)
    vals = kernels.K.diagonal() - _rho_sine_transform(kernels.K, sp)
    return _pick(vals, i)


def eval_S_from_transformation(P: TriangularKernel, sp, i: int | None = None):
    """``S(x, lam) = sin(rho x)/rho + int_0^x P(x,t) sin(rho(x-t))/rho dt``."""
    sp = as_spectral_point(sp)
    grid = P.grid
    x = grid.points
    D = np.where(_lower_mask(x.size), x[:, None] - x[None, :], 0.0)
    sin_over_rho = D * np.sinc(sp.rho * D / math.pi)
    integrand = P.values * sin_over_rho
    integral = grid.step * (integrand.sum(axis=1) - 0.5 * integrand[:, 0])
    integral[0] = 0.0
    vals = x * np.sinc(sp.rho * x / math.pi) + integral
    return _pick(vals, i)


def eval_S_prime(kernels: RepresentationKernels, sp, i: int | None = None):
    sp = as_spectral_point(sp)
    vals = kernels.R.diagonal() - _rho_sine_transform(kernels.R, sp)
    return _pick(vals, i)


def eval_C(kernels: RepresentationKernels, sp, i: int | None = None):
    sp = as_spectral_point(sp)
    vals = 1.0 - _rho_sine_transform(kernels.Q, sp)
    return _pick(vals, i)


def eval_C_prime(kernels: RepresentationKernels, sp, i: int | None = None):
    sp = as_spectral_point(sp)
    x = kernels.grid.points
    vals = -sp.rho * np.sin(sp.rho * x) - _rho_sine_transform(kernels.P, sp)
    return _pick(vals, i)
