import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from convspec import BoundaryCoefficients, CharFnModel, ConvergenceError, Grid
from convspec.forward import (
    LocalizationWarning,
    char_fn_decomposed,
    char_fn_direct,
    char_fn_from_model,
    char_fn_model_from_kernel,
    char_fn_model_from_potential,
    find_spectrum,
    search_spectrum,
    solve_ivp,
)
from convspec.grid import SpectralPoint

from .conftest import BC_SET, max_err, small_complex


def delta_free(lam, h, H):
    """Characteristic function for M = 0: -rho sin(rho pi) + (h+H) cos(rho pi) + h H sin(rho pi)/rho."""
    rho = cmath.sqrt(lam)
    sinc = math.pi if rho == 0 else cmath.sin(rho * math.pi) / rho
    return -rho * cmath.sin(rho * math.pi) + (h + H) * cmath.cos(rho * math.pi) + h * H * sinc


@pytest.mark.parametrize("scheme", ["trapezoid", "exponential"])
def test_ivp_free_cosine(scheme):
    errs = []
    for n in (128, 256):
        sol = solve_ivp(Grid(n).zeros(), 1.0, 0.0, 4.0, scheme)
        assert sol.y.values[0] == 1 and sol.yprime.values[0] == 0
        errs.append(max_err(sol.y.values, np.cos(2 * sol.grid.points)))
    if scheme == "exponential":
        assert errs[1] < 1e-12
    else:
        assert errs[1] < 1e-3 and 3.5 < errs[0] / errs[1] < 4.5


def test_ivp_linear_solution():
    sol = solve_ivp(Grid(64).zeros(), 0.0, 1.0, 0.0)
    assert max_err(sol.y.values, sol.grid.points) < 1e-13


@pytest.mark.parametrize("h", [0.0, 1.0, -0.7])
def test_ivp_constant_memory_gives_sinh(h):
    errs = []
    for n in (128, 256):
        g = Grid(n)
        sol = solve_ivp(g.constant(1.0), 1.0, h, 0.0)
        errs.append(max_err(sol.y.values, 1 + h * np.sinh(g.points)))
    assert errs[1] < 1e-3
    if h:
        assert 3.5 < errs[0] / errs[1] < 4.5


def test_char_fn_direct_classical():
    assert abs(char_fn_direct(Grid(256).zeros(), BoundaryCoefficients(0, 0), 0.25) + 0.5) < 1e-12


@pytest.mark.parametrize("bc", BC_SET + [BoundaryCoefficients(2, -1j)])
@pytest.mark.parametrize("lam", [0.0, 2.0, -3.0, 7 + 2j])
def test_char_fn_direct_free_closed_form(bc, lam):
    value = char_fn_direct(Grid(128).zeros(), bc, lam)
    assert abs(value - delta_free(lam, bc.h, bc.H)) < 1e-10 * (1 + abs(value))


def test_char_fn_direct_at_zero():
    bc = BoundaryCoefficients(0.4, -1.3)
    assert abs(char_fn_direct(Grid(64).zeros(), bc, 0.0) - (bc.h + bc.H + math.pi * bc.h * bc.H)) < 1e-12


@pytest.mark.parametrize("bc", BC_SET)
def test_decomposition_matches_shooting(bc):
    M = Grid(256).sample(lambda x: np.cos(x) + 0.5j * x)
    for lam in (1.0, -4.0, 3 + 1j):
        a, b = char_fn_direct(M, bc, lam), char_fn_decomposed(M, bc, lam)
        assert abs(a - b) < 1e-10 * (1 + abs(a))


def test_model_from_zero_kernel():
    g = Grid(64)
    m = char_fn_model_from_kernel(g.zeros(), BoundaryCoefficients(0, 0))
    assert m.alpha == 0 and not np.any(m.w.values)
    bc = BoundaryCoefficients(0.5, 2.0)
    m = char_fn_model_from_kernel(g.zeros(), bc)
    assert abs(m.alpha - (bc.h + bc.H + math.pi * bc.h * bc.H)) < 1e-13
    assert max_err(m.w.values, -(bc.h + bc.H) - bc.h * bc.H * (math.pi - g.points)) < 1e-13


def test_alpha_equals_H_when_h_zero():
    g = Grid(128)
    m = char_fn_model_from_kernel(g.sample(np.sin), BoundaryCoefficients(0, 0.7 - 0.1j))
    assert m.alpha == 0.7 - 0.1j


def test_char_fn_from_model_trivial_cases():
    g = Grid(32)
    assert abs(char_fn_from_model(CharFnModel(0, g.zeros()), 0.25) + 0.5) < 1e-14
    for k in range(1, 6):
        assert abs(char_fn_from_model(CharFnModel(1, g.zeros()), k * k) - 1) < 1e-12
    m = char_fn_model_from_kernel(g.zeros(), BoundaryCoefficients(0, 1))
    for k in range(0, 6):
        assert abs(m(k * k) - (-1) ** k) < 1e-12


@given(small_complex(6))
def test_model_is_even_in_rho(rho):
    g = Grid(64)
    m = char_fn_model_from_potential(g.sample(lambda x: 1 + x), BoundaryCoefficients(0.3, -1))
    plus = char_fn_from_model(m, SpectralPoint(rho * rho, rho))
    minus = char_fn_from_model(m, SpectralPoint(rho * rho, -rho))
    assert abs(plus - minus) <= 1e-12 * (1 + abs(plus))


@pytest.mark.parametrize("bc", BC_SET)
def test_two_paths_converge_at_second_order(bc):
    lams = [0.5, 4.0, 12.0, 25.0, 2.25 + 0.75j]
    errs = []
    for n in (128, 256):
        M = Grid(n).sample(lambda x: x / 2 + np.sin(x))
        model = char_fn_model_from_potential(M, bc)
        errs.append(max(abs(char_fn_direct(M, bc, lam) - model(lam)) for lam in lams))
    assert errs[1] < 5e-3
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_classical_spectrum():
    s = find_spectrum(Grid(128).zeros(), BoundaryCoefficients(0, 0), 30)
    k = np.arange(31)
    assert max_err(s.values, k**2) < 1e-9


def test_robin_spectrum_against_bisection():
    s = find_spectrum(Grid(128).zeros(), BoundaryCoefficients(0, 1), 30)

    def f(r):
        return r * math.sin(math.pi * r) - math.cos(math.pi * r)

    ref = [brentq(f, k, k + 0.5) for k in range(31)]
    assert max_err(s.rho, ref) < 1e-10


def test_spectrum_details_and_kappa_decay():
    g = Grid(256)
    res = find_spectrum(g.sample(lambda x: x / 2), BoundaryCoefficients(0, 0.3), 60, details=True)
    s = res.spectrum
    assert np.all(res.residuals <= 1e-9 * (1 + np.abs(s.values)))
    kappa = np.abs(s.kappa[5:])
    assert np.all(np.diff(kappa) <= 1e-12)
    assert not res.outside_disc


def test_strong_boundary_terms_are_tracked_in_order():
    """omega is about 3.6, so the low roots leave their unit-spaced discs."""
    g = Grid(256)
    M = g.constant(1.0)
    bc = BoundaryCoefficients(1, 1)
    with pytest.warns(LocalizationWarning):
        s = find_spectrum(M, bc, 6)
    model = char_fn_model_from_potential(M, bc)
    grid = np.linspace(-5, 40, 4501)
    vals = np.array([model(lam).real for lam in grid])
    brackets = np.flatnonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))
    roots = [brentq(lambda t: model(t).real, grid[i], grid[i + 1]) for i in brackets]
    assert max_err(s.values, roots[:7]) < 1e-8


@pytest.mark.parametrize("bc", [BoundaryCoefficients(1j, 0.3), BoundaryCoefficients(-0.4, 0.2 + 0.5j)])
def test_complex_spectrum(bc):
    g = Grid(256)
    M = g.sample(lambda x: x / 2 + 0.3j)
    res = find_spectrum(M, bc, 20, details=True)
    s = res.spectrum
    assert np.all(np.abs(np.imag(s.values)) > 0)
    direct = find_spectrum(M, bc, 5, method="direct")
    assert max_err(direct.values, s.values[:6]) < 1e-3


def test_search_failure_raises():
    with pytest.raises(ConvergenceError):
        search_spectrum(lambda lam: 1.0 + 0j, 2)
