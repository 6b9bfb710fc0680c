"""Main nonlinear integral equation and the two reconstruction algorithms.

The unknown ``N`` satisfies

    f(x) = sum_{nu>=1} ( psi_nu(x) N^{*nu}(x) + int_0^x Psi_nu(x,t) N^{*nu}(t) dt ),

    psi_nu(x)   = (pi - x)^nu / nu!,
    Psi_nu(x,t) = ( H (pi-x)^nu + h (pi-t)^(nu-1) (pi - t + (x-t)(nu + H (pi-t))) ) / nu!,

with ``f(x) = -w(pi - x) - h - H - h H x``.  The equation is Volterra-causal, so
it is solved by marching in ``x``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .forward import CharFnModel, find_spectrum
from .grid import BoundaryCoefficients, Grid, SampledFunction, Spectrum, cumulative_trapezoid
from .reconstruction import alpha_from_spectrum, fourier_data, tail_model, w_from_spectrum
from .volterra import DEFAULT_SERIES_TOL, conv_powers, kernels_at_pi, n_to_m

DEFAULT_SOLVER_NU = 30
MAX_SOLVER_NU = 120


class SpectrumConsistencyWarning(UserWarning):
    """The reconstructed operator does not reproduce the input spectrum."""


@dataclass(frozen=True, eq=False)
class MainEquationData:
    f: SampledFunction
    bc: BoundaryCoefficients
    nu_max: int | None = None
    tol: float = DEFAULT_SERIES_TOL

    def __post_init__(self):
        if self.nu_max is not None and self.nu_max < 1:
            raise ValueError("nu_max must be >= 1")


def _coefficients(grid: Grid, bc: BoundaryCoefficients, nu_max: int):
    """Per-power factors of the separable form of ``Psi_nu``."""
    t = grid.points
    a = math.pi - t
    nu = np.arange(1, nu_max + 1)[:, None]
    inv_fact = np.array([1.0 / math.factorial(k) for k in range(1, nu_max + 1)])[:, None]
    a_nu = a[None, :] ** nu
    a_nu1 = a[None, :] ** (nu - 1)
    mixed = a_nu1 * (nu + bc.H * a[None, :])
    return inv_fact, a_nu, mixed, t[None, :] * mixed


def evaluate_main_rhs(
    N: SampledFunction,
    bc: BoundaryCoefficients,
    nu_max: int | None = None,
    tol: float = DEFAULT_SERIES_TOL,
) -> SampledFunction:
    """Right-hand side ``f`` of the main equation for a given ``N``.

    The series over convolution powers ``N^{*nu}`` is truncated at ``nu_max``
    or, when that is ``None``, once the remaining terms fall below ``tol``.
    Inverse of :func:`solve_main_equation` up to quadrature error.
    """
    stack = conv_powers(N, nu_max, tol)
    grid = N.grid
    x = grid.points
    step = grid.step
    V = stack.nu_max
    inv_fact, a_nu, mixed, t_mixed = _coefficients(grid, bc, V)
    Nv = stack.powers
    h, H = bc.h, bc.H
    local = a_nu * inv_fact * Nv
    integral = inv_fact * (
        H * a_nu * cumulative_trapezoid(Nv, step, axis=1)
        + h * cumulative_trapezoid(a_nu * Nv, step, axis=1)
        + h * (x[None, :] * cumulative_trapezoid(mixed * Nv, step, axis=1) - cumulative_trapezoid(t_mixed * Nv, step, axis=1))
    )
    return N.with_values((local + integral).sum(axis=0))


@dataclass(frozen=True, eq=False)
class MainSolution:
    N: SampledFunction
    weighted: SampledFunction  # (pi - x) N(x); the last node is extrapolated
    nu_max: int
    residual: float


def _march(f: np.ndarray, grid: Grid, bc: BoundaryCoefficients, V: int):
    n = grid.n
    step = grid.step
    x = grid.points
    h, H = bc.h, bc.H
    inv_fact, a_nu, mixed, t_mixed = _coefficients(grid, bc, V)
    inv_fact = inv_fact[:, 0]
    N = np.zeros(n + 1, dtype=complex)
    pw = np.zeros((V, n + 1), dtype=complex)
    # trapezoid history sums over nodes 0..i-1 (weight 1/2 at node 0)
    U0 = np.zeros(V, dtype=complex)
    U1 = np.zeros(V, dtype=complex)
    U2 = np.zeros(V, dtype=complex)
    U3 = np.zeros(V, dtype=complex)
    worst = 0.0
    for i in range(n):
        if i == 0:
            p = np.zeros(V, dtype=complex)
            q = np.zeros(V, dtype=complex)
            q[0] = 1.0
        else:
            S = pw[: V - 1, 1:i] @ N[i - 1 : 0 : -1] if i > 1 else np.zeros(V - 1, dtype=complex)
            p = np.zeros(V, dtype=complex)
            q = np.zeros(V, dtype=complex)
            q[0] = 1.0
            b0 = pw[: V - 1, 0]
            for k in range(1, V):
                p[k] = step * (S[k - 1] + 0.5 * N[0] * p[k - 1])
                q[k] = step * (0.5 * b0[k - 1] + 0.5 * N[0] * q[k - 1])
        psi = a_nu[:, i] * inv_fact
        Hx = H * a_nu[:, i]
        # integral part: history + endpoint (t = x_i, where the (x - t) factor vanishes)
        hist = inv_fact * (Hx * U0 + h * U1 + h * (x[i] * U2 - U3))
        end_w = 0.5 * step * inv_fact * (Hx + h * a_nu[:, i]) if i > 0 else np.zeros(V)
        A = np.sum(psi * p) + step * np.sum(hist) + np.sum(end_w * p)
        B = np.sum(psi * q) + np.sum(end_w * q)
        if abs(B) < 1e-13:
            raise ConvergenceError("degenerate node equation in main-equation solver", index=i, residual=abs(f[i] - A))
        z = (f[i] - A) / B
        residual = abs(A + B * z - f[i])
        worst = max(worst, residual / (1.0 + abs(f[i])))
        if residual > 1e-10 * (1.0 + abs(f[i])) + 1e-12 * abs(A):
            raise ConvergenceError("node equation residual too large", index=i, last_iterate=z, residual=residual)
        N[i] = z
        pw[:, i] = p + q * z
        wgt = 0.5 if i == 0 else 1.0
        U0 += wgt * pw[:, i]
        U1 += wgt * a_nu[:, i] * pw[:, i]
        U2 += wgt * mixed[:, i] * pw[:, i]
        U3 += wgt * t_mixed[:, i] * pw[:, i]
    # the equation at x = pi does not involve N(pi); extrapolate it (quadratic)
    if n >= 3:
        N[n] = 3 * N[n - 1] - 3 * N[n - 2] + N[n - 3]
    else:
        N[n] = N[n - 1]
    return N, worst


def solve_main_equation(d: MainEquationData, details: bool = False):
    """March the main equation node by node.

    With the earlier nodes fixed, the discrete equation at ``x_i`` is affine in
    ``N(x_i)``: the ``nu = 1`` term contributes ``(pi - x_i) N(x_i)`` and higher
    powers enter only through trapezoid end weights.  Each node is therefore
    solved exactly and its residual checked.  The equation at ``x = pi``
    carries no information about ``N(pi)``; that sample is extrapolated and the
    weighted unknown ``(pi - x) N(x)`` is returned alongside.

    Parameters
    ----------
    d : MainEquationData
        Right-hand side ``f``, boundary coefficients and optional fixed ``nu_max``.
        With ``nu_max=None`` the series order starts at 30 and doubles (up to
        120) until the factorial tail bound drops below ``d.tol``.
    details : bool
        Return a :class:`MainSolution` instead of the bare ``N``.

    Returns
    -------
    SampledFunction or MainSolution

    Raises
    ------
    ConvergenceError
        A node equation is degenerate or its residual exceeds round-off level.
    """
    grid = d.f.grid
    f = np.asarray(d.f.values)
    V = d.nu_max or DEFAULT_SOLVER_NU
    while True:
        N, _ = _march(f, grid, d.bc, V)
        Nf = d.f.with_values(N)
        bound = conv_powers(Nf, V).tail_bound()
        if d.nu_max is not None or bound < d.tol or V >= MAX_SOLVER_NU:
            break
        V = min(2 * V, MAX_SOLVER_NU)
    x = grid.points
    weighted = (math.pi - x) * N
    if grid.n >= 2:
        weighted[-1] = 2 * weighted[-2] - weighted[-3]
    rhs = evaluate_main_rhs(Nf, d.bc, V)
    residual = float(np.max(np.abs(rhs.values[:-1] - f[:-1])))
    sol = MainSolution(Nf, d.f.with_values(weighted), V, residual)
    return sol if details else Nf


def main_rhs_from_model(model: CharFnModel, bc: BoundaryCoefficients) -> SampledFunction:
    """``f(x) = -w(pi - x) - h - H - h H x``."""
    x = model.w.grid.points
    f = -model.w.values[::-1] - bc.h - bc.H - bc.h * bc.H * x
    return model.w.with_values(f)


@dataclass(frozen=True, eq=False)
class InverseSolution:
    N: SampledFunction
    M: SampledFunction
    N_weighted: SampledFunction
    alpha: complex
    w: SampledFunction
    f: SampledFunction
    bc: BoundaryCoefficients
    H_recovered: complex | None = None
    diagnostics: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def _reconstruct(
    s: Spectrum,
    bc: BoundaryCoefficients,
    alpha: complex,
    grid: Grid,
    nu_max,
    tol,
    endpoint_correction,
    verify_K,
    spectrum_tol,
    H_recovered=None,
) -> InverseSolution:
    tail = tail_model(s)
    data = fourier_data(s, alpha, tail)
    w = w_from_spectrum(data, grid, endpoint_correction)
    model = CharFnModel(alpha, w, "from_spectrum")
    f = main_rhs_from_model(model, bc)
    sol = solve_main_equation(MainEquationData(f, bc, nu_max, tol), details=True)
    M = n_to_m(sol.N)
    sl = kernels_at_pi(sol.N, sol.nu_max)
    alpha_kernel = bc.h * sl.R.values[-1] + bc.H + bc.h * bc.H * sl.K.values[-1]
    diagnostics = {
        "main_equation_residual": sol.residual,
        "alpha": [alpha.real, alpha.imag],
        "alpha_consistency": float(abs(alpha - alpha_kernel)),
        "nu_max": sol.nu_max,
        "tail_c1": [tail.c1.real, tail.c1.imag],
        "w_right": [data.w_right.real, data.w_right.imag],
        "max_abs_weighted_N": float(np.max(np.abs(sol.weighted.values))),
    }
    notes = []
    if verify_K:
        K = min(verify_K, s.K)
        fwd = find_spectrum(M, bc, K, nu_max=sol.nu_max, tol=tol)
        dev = float(np.max(np.abs(fwd.values - s.values[: K + 1])))
        diagnostics["spectrum_max_deviation"] = dev
        diagnostics["spectrum_checked_K"] = K
        if dev > spectrum_tol:
            msg = f"reconstructed operator reproduces the input spectrum only to {dev:.3e} (k <= {K})"
            notes.append(msg)
            warnings.warn(msg, SpectrumConsistencyWarning, stacklevel=3)
    return InverseSolution(sol.N, M, sol.weighted, alpha, w, f, bc, H_recovered, diagnostics, notes)


def algorithm_1(
    s: Spectrum,
    bc: BoundaryCoefficients,
    grid: Grid | None = None,
    nu_max: int | None = None,
    tol: float = DEFAULT_SERIES_TOL,
    endpoint_correction: bool = True,
    verify_K: int | None = None,
    spectrum_tol: float = 1e-3,
) -> InverseSolution:
    """Recover ``M`` from the spectrum when both ``h`` and ``H`` are known.

    The data are overdetermined, so nothing forces an arbitrary list to be
    the spectrum of some ``L(M, h, H)``.  The main equation is solved
    regardless; with ``verify_K`` the recomputed spectrum is compared with the
    input and a :class:`SpectrumConsistencyWarning` is issued past ``spectrum_tol``.

    Parameters
    ----------
    s : Spectrum
        ``lambda_0..lambda_K`` and the tail convention beyond ``K``.
    bc : BoundaryCoefficients
    grid : Grid, optional
        Output grid, ``n = 512`` by default.
    nu_max, tol
        Truncation of the series in the main equation.
    endpoint_correction : bool
        Split off the linear endpoint interpolant before sine synthesis of ``w``.
    verify_K : int, optional
        Number of eigenvalues to recompute for the consistency check.
    spectrum_tol : float

    Returns
    -------
    InverseSolution
        ``M`` together with ``N``, ``alpha``, ``w``, the main-equation data and diagnostics.
    """
    grid = grid or Grid(512)
    alpha = alpha_from_spectrum(s)
    return _reconstruct(s, bc, alpha, grid, nu_max, tol, endpoint_correction, verify_K, spectrum_tol)


def algorithm_2(
    s: Spectrum,
    grid: Grid | None = None,
    nu_max: int | None = None,
    tol: float = DEFAULT_SERIES_TOL,
    endpoint_correction: bool = True,
    verify_K: int | None = None,
    spectrum_tol: float = 1e-3,
) -> InverseSolution:
    """Recover ``M`` and ``H`` from the spectrum alone, taking ``h = 0`` and ``H = alpha``."""
    grid = grid or Grid(512)
    alpha = alpha_from_spectrum(s)
    bc = BoundaryCoefficients(0.0, alpha)
    return _reconstruct(s, bc, alpha, grid, nu_max, tol, endpoint_correction, verify_K, spectrum_tol, H_recovered=alpha)
