"""Characteristic function and representation data rebuilt from a spectrum.

Given ``lambda_0..lambda_K`` the characteristic function is the infinite product

    Delta(lam) = pi (lambda_0 - lam) prod_{k>=1} (lambda_k - lam) / k^2
               = -rho sin(rho pi) * (lam - lambda_0)/lam * prod_{k>=1} (lambda_k - lam)/(k^2 - lam),

evaluated here in the second (ratio) form.  ``alpha = Delta(0)``, ``beta_k = Delta(k^2)``
and ``theta_k = (beta_k - alpha)/k`` are the sine coefficients of ``w``.

Eigenvalues past ``K`` follow the spectrum's tail convention.  Under
``"asymptotic"`` the roots continue as ``rho_k = k + c1/k + (c3 + e3 (-1)^k)/k^3``
with coefficients fitted to the stored tail; truncating at ``lambda_k = k^2``
instead leaves a relative error of about ``2 c1 / K`` in every product.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .forward import CharFnModel
from .grid import Grid, SampledFunction, Spectrum, as_spectral_point

MIN_FIT_K = 12
MIN_LEAD_K = 4
EXTENSION_FLOOR = 2000


@dataclass(frozen=True)
class TailModel:
    """Extrapolation ``rho_k = k + c1/k + (c3 + e3 (-1)^k)/k^3`` for ``k > K``."""

    K: int
    c1: complex = 0.0
    c3: complex = 0.0
    e3: complex = 0.0

    @property
    def trivial(self) -> bool:
        return self.c1 == 0 and self.c3 == 0 and self.e3 == 0

    def rho(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        sign = np.where(k % 2 == 0, 1.0, -1.0)
        return k + self.c1 / k + (self.c3 + self.e3 * sign) / k**3

    @property
    def w_right(self) -> complex:
        """``w(pi)`` implied by the leading coefficient: ``c1 = -w(pi)/pi``."""
        return -math.pi * self.c1


def tail_model(s: Spectrum) -> TailModel:
    """Fit the tail coefficients to the last quarter of the stored roots.

    Spectra with ``tail="squares"`` or ``K < MIN_LEAD_K`` get the trivial model
    ``lambda_k = k^2``; below ``MIN_FIT_K`` only ``c1`` is fitted.
    """
    K = s.K
    if s.tail == "squares" or K < MIN_LEAD_K:
        return TailModel(K)
    count = max(6, (K + 1) // 4) if K >= MIN_FIT_K else 2
    k = np.arange(K - count + 1, K + 1, dtype=float)
    y = s.kappa[K - count + 1 :] * k
    if not np.any(y):
        return TailModel(K)
    if K < MIN_FIT_K:
        return TailModel(K, complex(np.mean(y)))
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    A = np.column_stack([np.ones_like(k), 1.0 / k**2, sign / k**2]).astype(complex)
    coef, *_ = np.linalg.lstsq(A, y.astype(complex), rcond=None)
    return TailModel(K, complex(coef[0]), complex(coef[1]), complex(coef[2]))


@dataclass(frozen=True)
class _Extended:
    lam: np.ndarray  # lambda_k for k = 1..k_ext
    remainder: complex  # c such that prod_{k>k_ext} ~ exp(c * sum 1/(k^2 - lam))
    k_ext: int


def _extend(s: Spectrum, tail: TailModel, lam: complex = 0.0) -> _Extended:
    explicit = np.asarray(s.values[1:])
    if tail.trivial:
        return _Extended(explicit, 0.0, s.K)
    k_ext = max(4 * s.K, EXTENSION_FLOOR, int(4 * math.sqrt(abs(lam))) + 1)
    k = np.arange(s.K + 1, k_ext + 1)
    extra = tail.rho(k) ** 2
    return _Extended(np.concatenate([explicit, extra]), 2.0 * tail.c1, k_ext)


def _tail_sum(k_ext: int, lam: complex) -> complex:
    """``sum_{k > k_ext} 1/(k^2 - lam)`` by the midpoint integral, valid for ``|lam| << k_ext^2``."""
    a = k_ext + 0.5
    return sum(lam**m / ((2 * m + 1) * a ** (2 * m + 1)) for m in range(5))


def product_char_fn(s: Spectrum, sp, tail: TailModel | None = None) -> complex:
    """Characteristic function from its zeros, ratio form with removable singularities paired.

    At ``lam`` near ``j^2`` the factor ``(lambda_j - lam)/(j^2 - lam)`` is combined
    with ``sin(rho pi)`` analytically; at ``lam = 0`` the ``lambda_0`` factor is
    combined the same way.  Nothing is evaluated at an offset point.
    """
    sp = as_spectral_point(sp)
    lam, rho = sp.lam, sp.rho
    tail = tail_model(s) if tail is None else tail
    ext = _extend(s, tail, lam)
    k = np.arange(1, ext.k_ext + 1, dtype=float)
    num = ext.lam - lam
    den = k * k - lam
    j = int(round(rho.real))
    if 1 <= j <= ext.k_ext and abs(rho - j) < 0.5:
        paired = (-1) ** (j + 1) * np.sinc(rho - j) / (rho * (rho + j)) * num[j - 1]
        num = np.delete(num, j - 1)
        den = np.delete(den, j - 1)
    else:
        paired = np.sinc(rho)
    ratio = np.prod(num / den)
    if ext.remainder:
        ratio *= np.exp(ext.remainder * _tail_sum(ext.k_ext, lam))
    lam0 = s.values[0]
    return complex(-math.pi * (lam - lam0) * paired * ratio)


def product_char_fn_raw(s: Spectrum, lam: complex, k_max: int = 100_000) -> complex:
    """Direct truncation of ``pi (lambda_0 - lam) prod (lambda_k - lam)/k^2``, squares past ``K``.

    Only for cross-checks at small ``|lam|``; convergence is ``O(|lam| / k_max)``.
    """
    lam = complex(lam)
    vals = np.asarray(s.values)
    k = np.arange(1, k_max + 1, dtype=float)
    lam_k = np.concatenate([vals[1:], k[s.K :] ** 2])
    return complex(math.pi * (vals[0] - lam) * np.prod((lam_k - lam) / k**2))


def alpha_from_spectrum(s: Spectrum, tail: TailModel | None = None) -> complex:
    """``alpha = pi lambda_0 prod_{k>=1} lambda_k / k^2`` (the value ``Delta(0)``)."""
    tail = tail_model(s) if tail is None else tail
    ext = _extend(s, tail)
    if np.any(ext.lam == 0):
        warnings.warn("lambda_k = 0 for some k >= 1; alpha = Delta(0) vanishes", RuntimeWarning, stacklevel=2)
    k = np.arange(1, ext.k_ext + 1, dtype=float)
    value = math.pi * s.values[0] * np.prod(ext.lam / (k * k))
    if ext.remainder:
        value *= np.exp(ext.remainder * _tail_sum(ext.k_ext, 0.0))
    return complex(value)


@dataclass(frozen=True, eq=False)
class FourierData:
    """``beta_k = Delta(k^2)`` and ``theta_k = (beta_k - alpha)/k`` for ``k = 1..K``.

    ``w_left = w(0) = -alpha`` and ``w_right = w(pi)``, the latter from the tail model.
    """

    beta: np.ndarray
    theta: np.ndarray
    alpha: complex
    w_left: complex = 0.0
    w_right: complex = 0.0

    @property
    def K(self) -> int:
        return self.theta.size

    @classmethod
    def from_theta(cls, theta, alpha=0.0, w_left=None, w_right=0.0) -> "FourierData":
        theta = np.asarray(theta, dtype=complex)
        k = np.arange(1, theta.size + 1)
        return cls(alpha + k * theta, theta, complex(alpha), -complex(alpha) if w_left is None else w_left, w_right)


def fourier_data(s: Spectrum, alpha: complex | None = None, tail: TailModel | None = None) -> FourierData:
    tail = tail_model(s) if tail is None else tail
    if alpha is None:
        alpha = alpha_from_spectrum(s, tail)
    k = np.arange(1, s.K + 1)
    beta = np.array([product_char_fn(s, float(kk * kk), tail) for kk in k])
    theta = (beta - alpha) / k
    return FourierData(beta, theta, complex(alpha), -complex(alpha), tail.w_right)


def beta_closed_form(s: Spectrum, k: int, tail: TailModel | None = None) -> complex:
    """``beta_k = (-1)^{k+1} pi/(2k^2) (lambda_0 - k^2)(lambda_k - k^2) d_k`` with
    ``d_k = prod_{nu != k} (lambda_nu - k^2)/(nu^2 - k^2)``."""
    tail = tail_model(s) if tail is None else tail
    ext = _extend(s, tail, k * k)
    nu = np.arange(1, ext.k_ext + 1, dtype=float)
    mask = nu != k
    d_k = np.prod((ext.lam[mask] - k * k) / (nu[mask] ** 2 - k * k))
    if ext.remainder:
        d_k *= np.exp(ext.remainder * _tail_sum(ext.k_ext, k * k))
    lam_k = ext.lam[k - 1]
    return complex((-1) ** (k + 1) * math.pi / (2 * k * k) * (s.values[0] - k * k) * (lam_k - k * k) * d_k)


def w_from_spectrum(d: FourierData, grid: Grid, endpoint_correction: bool = True) -> SampledFunction:
    """Sample ``w`` from its sine coefficients ``theta_k``.

    Plain synthesis is ``(2/pi) sum theta_k sin(kx)``.  With
    ``endpoint_correction`` the linear function ``L`` through ``(0, w_left)`` and
    ``(pi, w_right)`` is split off first: its coefficients
    ``(L(0) - (-1)^k L(pi))/k`` are subtracted from ``theta_k`` and ``L`` is
    added back in closed form, so the truncated series no longer has to
    reproduce the endpoint jumps of the odd extension (no Gibbs ringing).
    """
    x = grid.points
    k = np.arange(1, d.K + 1)
    coeff = np.array(d.theta, dtype=complex)
    base = np.zeros(x.size, dtype=complex)
    if endpoint_correction:
        sign = np.where(k % 2 == 0, 1.0, -1.0)
        coeff = coeff - (d.w_left - sign * d.w_right) / k
        base = d.w_left + (d.w_right - d.w_left) * x / math.pi
    values = base + (2.0 / math.pi) * (np.sin(np.outer(x, k)) @ coeff)
    return SampledFunction(grid, values)


def model_from_spectrum(
    s: Spectrum, grid: Grid, endpoint_correction: bool = True, tail: TailModel | None = None
) -> CharFnModel:
    tail = tail_model(s) if tail is None else tail
    d = fourier_data(s, tail=tail)
    return CharFnModel(d.alpha, w_from_spectrum(d, grid, endpoint_correction), "from_spectrum")


@dataclass(frozen=True)
class AsymptoticsReport:
    """Empirical check of ``{kappa_k}`` in l2: partial sums of ``|kappa_k|^2``."""

    partial_sums: np.ndarray
    last_window_increase: float
    max_abs_kappa_tail: float

    def square_summable(self, threshold: float = 1e-6) -> bool:
        return self.last_window_increase < threshold


def asymptotics_report(s: Spectrum, window: int = 20) -> AsymptoticsReport:
    kappa = s.kappa
    sums = np.cumsum(np.abs(kappa) ** 2)
    window = min(window, s.K)
    increase = float(sums[-1] - sums[-1 - window])
    tail = float(np.max(np.abs(kappa[-window:])))
    return AsymptoticsReport(sums, increase, tail)
