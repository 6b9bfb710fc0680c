"""Forward problem: integro-differential IVP, characteristic function, spectrum.

The boundary value problem is

    -y'' + int_0^x M(x - t) y'(t) dt = lam * y,   0 < x < pi,
    y'(0) - h y(0) = 0,   y'(pi) + H y(pi) = 0,

and its eigenvalues are the zeros of ``Delta(lam) = phi'(pi) + H phi(pi)``
where ``phi(0) = 1, phi'(0) = h``.  ``Delta`` is evaluated two ways: by marching
the IVP directly, and through the representation

    Delta(lam) = -rho sin(rho pi) + alpha + rho int_0^pi w(x) sin(rho x) dx

whose data ``(alpha, w)`` come from the transformation kernels at ``x = pi``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .errors import ConvergenceError, MultipleRootError
from .grid import (
    BoundaryCoefficients,
    SampledFunction,
    SpectralPoint,
    Spectrum,
    as_spectral_point,
    canonical_rho,
)
from .volterra import DEFAULT_SERIES_TOL, kernels_at_pi, m_to_n

Scheme = Literal["trapezoid", "exponential"]


class LocalizationWarning(UserWarning):
    """An eigenvalue root lies outside its asymptotic localization disc."""


@dataclass(frozen=True, eq=False)
class IvpSolution:
    y: SampledFunction
    yprime: SampledFunction
    point: SpectralPoint

    @property
    def grid(self):
        return self.y.grid


def _propagator(lam: complex, s: float):
    """Coefficients of the exact step for ``y'' + lam y = g`` with linear ``g``.

    Returns ``(c, sr, a0, a1, b1)`` with ``c = cos(rho s)``, ``sr = sin(rho s)/rho``,
    ``a0 = (1 - c)/lam``, ``a1 = (s - sr)/(lam s)`` and ``b1 = (1 - c)/(lam s)``;
    all are entire in ``lam``, so small ``|lam s^2|`` uses the Taylor series.
    """
    z = lam * s * s
    if abs(z) < 0.5:
        terms = [(-z) ** k for k in range(14)]
        fact = [math.factorial(m) for m in range(2 * 14 + 3)]
        c = sum(t / fact[2 * k] for k, t in enumerate(terms))
        sr = s * sum(t / fact[2 * k + 1] for k, t in enumerate(terms))
        e2 = sum(t / fact[2 * k + 2] for k, t in enumerate(terms))
        e3 = sum(t / fact[2 * k + 3] for k, t in enumerate(terms))
        return c, sr, s * s * e2, s * s * e3, s * e2
    rho = cmath.sqrt(lam)
    c = cmath.cos(rho * s)
    sr = cmath.sin(rho * s) / rho
    return c, sr, (1 - c) / lam, (s - sr) / (lam * s), (1 - c) / (lam * s)


def solve_ivp(
    M: SampledFunction,
    y0: complex,
    y0prime: complex,
    sp,
    scheme: Scheme = "trapezoid",
) -> IvpSolution:
    """March ``y'' = -lam y + int_0^x M(x-t) y'(t) dt`` from the given initial data.

    The memory term uses trapezoid product quadrature over the history; its
    dependence on the new node's ``y'`` is linear, so every step is a small
    linear solve.  ``scheme="trapezoid"`` is the implicit trapezoid rule on the
    first-order system.  ``scheme="exponential"`` propagates the free part
    ``y'' + lam y`` exactly and integrates the memory forcing as a linear
    interpolant, which removes the ``rho**3 step**2`` phase error of the
    trapezoid rule and is exact for ``M = 0``.
    """
    sp = as_spectral_point(sp)
    lam = sp.lam
    grid = M.grid
    n, s = grid.n, grid.step
    m = np.asarray(M.values)
    y = np.zeros(n + 1, dtype=complex)
    p = np.zeros(n + 1, dtype=complex)
    y[0], p[0] = y0, y0prime
    m0 = complex(m[0])
    g_i = 0.0 + 0.0j
    if scheme == "trapezoid":
        denom = 1.0 + lam * s * s / 4.0 - s * s * m0 / 4.0
    elif scheme == "exponential":
        c, sr, a0, a1, b1 = _propagator(lam, s)
        denom = 1.0 - b1 * s * m0 / 2.0
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if abs(denom) < 1e-14:
        raise ConvergenceError("singular step system in solve_ivp", index=0)
    for i in range(n):
        # g(x_{i+1}) = G + (s/2) M(0) p_{i+1}
        G = s * (m[i:0:-1] @ p[1 : i + 1] + 0.5 * m[i + 1] * p[0]) if i > 0 else 0.5 * s * m[1] * p[0]
        if scheme == "trapezoid":
            p[i + 1] = (p[i] + 0.5 * s * (-2.0 * lam * y[i] - 0.5 * lam * s * p[i] + g_i + G)) / denom
            y[i + 1] = y[i] + 0.5 * s * (p[i] + p[i + 1])
        else:
            p[i + 1] = (-lam * sr * y[i] + c * p[i] + sr * g_i + b1 * (G - g_i)) / denom
            g_next = G + 0.5 * s * m0 * p[i + 1]
            y[i + 1] = c * y[i] + sr * p[i] + a0 * g_i + a1 * (g_next - g_i)
        g_i = G + 0.5 * s * m0 * p[i + 1]
    return IvpSolution(M.with_values(y), M.with_values(p), sp)


def char_fn_direct(M: SampledFunction, bc: BoundaryCoefficients, sp, scheme: Scheme = "exponential") -> complex:
    """``Delta(lam) = phi'(pi) + H phi(pi)`` with ``phi(0) = 1, phi'(0) = h``.

    Parameters
    ----------
    M : SampledFunction
    bc : BoundaryCoefficients
    sp : complex or SpectralPoint
        Spectral parameter ``lam``.
    scheme : {"exponential", "trapezoid"}
        Time stepper passed to :func:`solve_ivp`.

    Returns
    -------
    complex
    """
    sol = solve_ivp(M, 1.0, bc.h, sp, scheme)
    return complex(sol.yprime.values[-1] + bc.H * sol.y.values[-1])


def char_fn_decomposed(M: SampledFunction, bc: BoundaryCoefficients, sp, scheme: Scheme = "exponential") -> complex:
    """``Delta = C'(pi) + h S'(pi) + H C(pi) + h H S(pi)`` from separate ``C`` and ``S`` solves."""
    C = solve_ivp(M, 1.0, 0.0, sp, scheme)
    S = solve_ivp(M, 0.0, 1.0, sp, scheme)
    h, H = bc.h, bc.H
    return complex(
        C.yprime.values[-1] + h * S.yprime.values[-1] + H * C.y.values[-1] + h * H * S.y.values[-1]
    )


@dataclass(frozen=True, eq=False)
class CharFnModel:
    """``Delta(lam) = -rho sin(rho pi) + alpha + rho int_0^pi w(x) sin(rho x) dx``."""

    alpha: complex
    w: SampledFunction
    provenance: Literal["from_kernel", "from_spectrum"] = "from_kernel"

    @property
    def omega(self) -> complex:
        """``-w(pi)``; fixes the leading eigenvalue asymptotics ``rho_k ~ k + omega/(pi k)``."""
        return complex(-self.w.values[-1])

    def __call__(self, lam) -> complex:
        return char_fn_from_model(self, lam)

    def homotopy(self, t: complex, lam) -> complex:
        """``-rho sin(rho pi) + t (alpha + rho int w sin)``; equals ``self(lam)`` at ``t = 1``."""
        rho = as_spectral_point(lam).rho
        return complex(-rho * cmath.sin(rho * math.pi) + t * (self.alpha + rho_sine_integral(self.w, rho)))


def char_fn_model_from_kernel(
    N: SampledFunction,
    bc: BoundaryCoefficients,
    nu_max: int | None = None,
    tol: float = DEFAULT_SERIES_TOL,
) -> CharFnModel:
    """``alpha = h R(pi,pi) + H + h H K(pi,pi)`` and
    ``-w(pi - x) = P(pi,x) + h R(pi,x) + H Q(pi,x) + h H K(pi,x)``."""
    sl = kernels_at_pi(N, nu_max, tol)
    h, H = bc.h, bc.H
    alpha = h * sl.R.values[-1] + H + h * H * sl.K.values[-1]
    rhs = sl.P.values + h * sl.R.values + H * sl.Q.values + h * H * sl.K.values
    return CharFnModel(complex(alpha), N.with_values(-rhs[::-1]), "from_kernel")


def char_fn_model_from_potential(M: SampledFunction, bc: BoundaryCoefficients, **kw) -> CharFnModel:
    return char_fn_model_from_kernel(m_to_n(M), bc, **kw)


def rho_sine_integral(w: SampledFunction, rho: complex) -> complex:
    """``rho * int_0^pi w(x) sin(rho x) dx`` for the piecewise-linear interpolant of ``w``.

    Exact integration of the interpolant (Filon-type rule): accurate uniformly in
    ``rho``, even in ``rho`` and finite at ``rho = 0``.
    """
    v = w.values
    s = w.grid.step
    x = w.grid.points
    mid = 0.5 * (x[1:] + x[:-1])
    dw = np.diff(v)
    body = np.sum(dw * np.cos(rho * mid)) * np.sinc(rho * s / (2 * math.pi))
    return complex(v[0] - v[-1] * cmath.cos(rho * math.pi) + body)


def char_fn_from_model(model: CharFnModel, sp) -> complex:
    sp = as_spectral_point(sp)
    rho = sp.rho
    return complex(-rho * cmath.sin(rho * math.pi) + model.alpha + rho_sine_integral(model.w, rho))


@dataclass
class SpectrumSearch:
    """Located eigenvalues with per-root diagnostics."""

    spectrum: Spectrum
    residuals: np.ndarray
    iterations: np.ndarray
    outside_disc: list[int] = field(default_factory=list)


def _newton_steps(func, z0, max_iter, step_tol=1e-14):
    """Plain Newton with central-difference derivatives; returns ``(z, f, iterations, converged)``."""
    z = complex(z0)
    f = func(z)
    for it in range(1, max_iter + 1):
        d = 1e-6 * (1.0 + abs(z))
        deriv = (func(z + d) - func(z - d)) / (2 * d)
        if deriv == 0 or not cmath.isfinite(deriv):
            return z, f, it, False
        dz = f / deriv
        z = z - dz
        f = func(z)
        if not cmath.isfinite(f):
            return z, f, it, False
        if abs(dz) <= step_tol * (1.0 + abs(z)) or f == 0:
            return z, f, it, True
    return z, f, max_iter, False


def _newton(func, z0, scale_fn, tol_res, max_iter, index):
    z, f, it, _ = _newton_steps(func, z0, max_iter)
    scale = scale_fn(z)
    if not abs(f) <= tol_res * scale:
        raise ConvergenceError(
            f"eigenvalue k={index} did not converge: |Delta|={abs(f):.3e}",
            index=index, last_iterate=z, residual=abs(f),
        )
    d = 1e-6 * (1.0 + abs(z))
    deriv = (func(z + d) - func(z - d)) / (2 * d)
    if abs(deriv) < 1e-7 * (1.0 + abs(z)):
        raise MultipleRootError(
            f"eigenvalue k={index} looks multiple (|Delta'|={abs(deriv):.2e})", index=index, last_iterate=z
        )
    return z, abs(f), it


def _arc(t: float) -> complex:
    return complex(t, 0.5 * t * (1.0 - t))


def _track(family, k, max_iter, min_dt=1e-4):
    """Follow the ``k``-th zero of ``family(t, .)`` from ``t = 0`` to ``t = 1``.

    At ``t = 0`` the zeros are ``rho = k`` (``lam = 0`` for ``k = 0``).  The
    parameter runs along the complex arc ``t + i t (1 - t) / 2`` so that real
    zeros do not collide on the way.  Steps are halved whenever Newton fails or
    the root moves by more than a quarter in ``rho``, and whenever one full step
    and two half steps disagree.
    """
    if k == 0:
        def at(t):
            return lambda lam: family(_arc(t), lam)
        def rho_of(z):
            return cmath.sqrt(z)
        z = 0j
    else:
        def at(t):
            return lambda r: family(_arc(t), r * r)
        def rho_of(z):
            return z
        z = complex(k)
    t, dt = 0.0, 0.05
    while t < 1.0:
        step = min(dt, 1.0 - t)
        z_new, _, _, ok = _newton_steps(at(t + step), z, 12, 1e-11)
        if ok:
            z_half, _, _, ok_a = _newton_steps(at(t + step / 2), z, 12, 1e-11)
            z_two, _, _, ok_b = _newton_steps(at(t + step), z_half, 12, 1e-11)
            ok = ok_a and ok_b and abs(z_two - z_new) <= 1e-8 * (1.0 + abs(z_new))
        a, b = rho_of(z_new), rho_of(z)
        if ok and min(abs(a - b), abs(a + b)) <= 0.25:
            t += step
            z = z_new
            dt = min(2 * dt, 0.25)
        else:
            dt = step / 2
            if dt < min_dt:
                raise ConvergenceError(f"lost track of eigenvalue k={k} at t={t:.4g}", index=k, last_iterate=z)
    return z


def search_spectrum(
    delta: Callable[[complex], complex],
    K: int,
    omega: complex = 0.0,
    tol_res: float = 1e-9,
    max_iter: int = 50,
    family: Callable[[float, complex], complex] | None = None,
    starts: np.ndarray | None = None,
) -> SpectrumSearch:
    """Zeros of ``delta`` indexed ``k = 0..K``.

    ``k = 0`` is refined by Newton in ``lam``, ``k >= 1`` by Newton in ``rho``;
    derivatives are central differences.  Starting points come from ``family``
    when given: a homotopy with ``family(0, lam) = -rho sin(rho pi)`` and
    ``family(1, lam) = delta(lam)`` along which each zero is followed from
    ``rho = k``; the tracked zeros are then indexed by increasing ``Re rho``.  Without it the start is ``k + omega/(pi k)``, which is only
    reliable once ``|omega| / (pi k)`` is small.  ``starts`` (eigenvalues ``lam``)
    overrides both.
    """
    if K < 1:
        raise ValueError("need K >= 1")
    lam_vals = np.zeros(K + 1, dtype=complex)
    residuals = np.zeros(K + 1)
    iters = np.zeros(K + 1, dtype=int)
    outside = []

    def rel_scale(lam):
        return 1.0 + abs(lam)

    if starts is None and family is not None:
        tracked = [_track(family, 0, max_iter)] + [_track(family, k, max_iter) ** 2 for k in range(1, K + 1)]
        rho_t = [canonical_rho(cmath.sqrt(v)) for v in tracked]
        order = sorted(range(K + 1), key=lambda j: (round(rho_t[j].real, 9), rho_t[j].imag))
        starts = np.array([tracked[j] for j in order])
    start0 = starts[0] if starts is not None else 0.0
    lam0, residuals[0], iters[0] = _newton(delta, start0, rel_scale, tol_res, max_iter, 0)
    lam_vals[0] = lam0
    for k in range(1, K + 1):
        if starts is not None:
            start = canonical_rho(cmath.sqrt(starts[k]))
        else:
            shift = omega / (math.pi * k)
            if abs(shift) > 0.25:
                shift *= 0.25 / abs(shift)
            start = k + shift
        rho_k, residuals[k], iters[k] = _newton(
            lambda r: delta(r * r), start, lambda r: 1.0 + abs(r * r), tol_res, max_iter, k
        )
        lam_vals[k] = rho_k * rho_k
    spectrum = Spectrum(lam_vals, "asymptotic")
    rho = spectrum.rho
    for k in range(K + 1):
        if abs(rho[k] - k) > 0.5:
            outside.append(k)
    if outside:
        warnings.warn(f"eigenvalues outside their localization disc |rho-k|<=1/2: k={outside}", LocalizationWarning, stacklevel=2)
    gaps = np.abs(lam_vals[:, None] - lam_vals[None, :]) + np.eye(K + 1)
    if np.any(gaps < 1e-8 * (1.0 + np.abs(lam_vals))[:, None]):
        raise ConvergenceError("eigenvalue search returned a root twice", last_iterate=lam_vals)
    return SpectrumSearch(spectrum, residuals, iters, outside)


def find_spectrum(
    M: SampledFunction,
    bc: BoundaryCoefficients,
    K: int,
    method: Literal["model", "direct"] = "model",
    tol_res: float = 1e-9,
    nu_max: int | None = None,
    tol: float = DEFAULT_SERIES_TOL,
    details: bool = False,
):
    """Eigenvalues ``lambda_0..lambda_K`` of ``L(M, h, H)`` ordered by localization index.

    Parameters
    ----------
    M : SampledFunction
        Convolution kernel on ``[0, pi]``.
    bc : BoundaryCoefficients
        Robin coefficients ``(h, H)``.
    K : int
        Highest index; ``K + 1`` eigenvalues are returned.
    method : {"model", "direct"}
        ``"model"`` evaluates ``Delta`` through the kernel representation, which
        stays accurate uniformly in ``k``.  ``"direct"`` polishes those roots
        against the marched IVP, whose memory quadrature degrades once
        ``k * step`` is not small.
    tol_res : float
        Relative residual every root must reach.
    nu_max, tol
        Truncation of the resolvent series (``None`` picks it adaptively).
    details : bool
        Return the full :class:`SpectrumSearch` (residuals, iteration counts,
        roots outside their localization disc) instead of the spectrum.

    Returns
    -------
    Spectrum or SpectrumSearch

    Raises
    ------
    ConvergenceError
        A root could not be tracked or refined, or two indices converged to one root.
    """
    if method not in ("model", "direct"):
        raise ValueError(f"unknown method {method!r}")
    model = char_fn_model_from_potential(M, bc, nu_max=nu_max, tol=tol)
    result = search_spectrum(model.__call__, K, model.omega, tol_res, family=model.homotopy)
    if method == "direct":
        # polish the representation roots with the marched IVP
        def delta(lam):
            return char_fn_direct(M, bc, lam)

        starts = result.spectrum.values
        result = search_spectrum(delta, K, tol_res=tol_res, family=None, starts=starts)
    return result if details else result.spectrum


def find_spectrum_of_model(model: CharFnModel, K: int, tol_res: float = 1e-9, details: bool = False):
    result = search_spectrum(model.__call__, K, model.omega, tol_res, family=model.homotopy)
    return result if details else result.spectrum
