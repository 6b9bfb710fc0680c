"""Cross-representation checks of the forward machinery.

Each check compares two independent evaluations of the same quantity:

* ``two_path``: ``Delta`` by marching the IVP against the kernel representation;
* ``c_identity``: ``C(x, lam)`` against ``1 - lam int_0^x S(t, lam) dt``;
* ``product``: ``Delta`` rebuilt from computed eigenvalues against the kernel representation;
* ``order``: the ``two_path`` discrepancy at ``n`` and ``n/2``, whose ratio is about 4
  for a second-order discretisation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InputError
from .forward import char_fn_direct, char_fn_model_from_potential, find_spectrum, solve_ivp
from .grid import BoundaryCoefficients, Grid, SampledFunction, SpectralPoint, cumulative_trapezoid
from .reconstruction import product_char_fn

# real points in (0, 25] and a few complex ones with |Im rho| <= 1/4, where Delta stays O(|rho|)
SAMPLE_RHO = (1.5 + 0.25j, 2.5 - 0.2j, 3.7 + 0.1j, 4.4 - 0.25j)
SAMPLE_LAMBDAS = tuple(np.linspace(0.5, 25.0, 16)) + tuple(r * r for r in SAMPLE_RHO)
IDENTITY_LAMBDAS = (0.0, 4.0, -9.0)
PRODUCT_LAMBDAS = (-1.0, -10.0, 2.5, 6.3)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    detail: dict | None = None

    def to_json(self) -> dict:
        return asdict(self)


def two_path_discrepancy(M: SampledFunction, bc: BoundaryCoefficients, lambdas=SAMPLE_LAMBDAS, nu_max=None) -> float:
    """``max |Delta_direct - Delta_model|`` over ``lambdas``."""
    model = char_fn_model_from_potential(M, bc, nu_max=nu_max)
    return max(abs(char_fn_direct(M, bc, lam) - model(lam)) for lam in lambdas)


def c_identity_discrepancy(M: SampledFunction, lambdas=IDENTITY_LAMBDAS) -> float:
    """``max_x |C(x, lam) - (1 - lam int_0^x S)|`` with both solutions from the trapezoid scheme."""
    worst = 0.0
    for lam in lambdas:
        sp = SpectralPoint.from_lambda(lam)
        C = solve_ivp(M, 1.0, 0.0, sp, "trapezoid").y.values
        S = solve_ivp(M, 0.0, 1.0, sp, "trapezoid").y.values
        rhs = 1.0 - lam * cumulative_trapezoid(S, M.grid.step)
        worst = max(worst, float(np.max(np.abs(C - rhs))))
    return worst


def product_discrepancy(M: SampledFunction, bc: BoundaryCoefficients, K: int, lambdas=PRODUCT_LAMBDAS) -> float:
    """``max |Delta_product - Delta_model| / (1 + |lam|)`` with ``K`` computed eigenvalues."""
    model = char_fn_model_from_potential(M, bc)
    s = find_spectrum(M, bc, K)
    return max(abs(product_char_fn(s, lam) - model(lam)) / (1.0 + abs(lam)) for lam in lambdas)


def subsample(f: SampledFunction) -> SampledFunction:
    """Every other node: the same function on the grid with ``n/2`` intervals."""
    if f.grid.n % 2:
        raise InputError(f"cannot halve a grid with odd n={f.grid.n}")
    return SampledFunction(Grid(f.grid.n // 2), f.values[::2])


def order_ratio(M: SampledFunction, bc: BoundaryCoefficients) -> tuple[float, float, float]:
    """Two-path discrepancies at ``n/2`` and ``n`` and their ratio."""
    fine = two_path_discrepancy(M, bc)
    coarse = two_path_discrepancy(subsample(M), bc)
    ratio = coarse / fine if fine > 0 else math.inf
    return coarse, fine, ratio


def run_checks(
    M: SampledFunction,
    bc: BoundaryCoefficients,
    K: int,
    two_path_tol: float,
    identity_tol: float,
    product_tol: float,
    min_order_ratio: float,
    floor: float = 1e-10,
) -> list[CheckResult]:
    """All four checks.  The order check passes when both discrepancies sit below ``floor``."""
    tp = two_path_discrepancy(M, bc)
    ci = c_identity_discrepancy(M)
    pd = product_discrepancy(M, bc, K)
    coarse, fine, ratio = order_ratio(M, bc)
    order_ok = ratio >= min_order_ratio or max(coarse, fine) < floor
    return [
        CheckResult("two_path", tp, two_path_tol, tp <= two_path_tol),
        CheckResult("c_identity", ci, identity_tol, ci <= identity_tol),
        CheckResult("product", pd, product_tol, pd <= product_tol),
        CheckResult(
            "order",
            ratio if math.isfinite(ratio) else -1.0,
            min_order_ratio,
            order_ok,
            {"coarse": coarse, "fine": fine, "n": M.grid.n},
        ),
    ]
