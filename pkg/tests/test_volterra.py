import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import i0, i1

from convspec import Grid, InputError, SampledFunction
from convspec.forward import solve_ivp
from convspec.grid import SpectralPoint, cumulative_trapezoid
from convspec.volterra import (
    conv,
    conv_powers,
    eval_C,
    eval_C_prime,
    eval_S,
    eval_S_from_transformation,
    eval_S_prime,
    kernels_at_pi,
    m_to_n,
    n_to_m,
    representation_kernels,
    transformation_kernel,
)

from .conftest import max_err, sample_arrays, small_complex


def test_conv_closed_forms():
    g = Grid(64)
    x = g.points
    one = g.constant(1.0)
    assert max_err(conv(g.zeros(), g.sample(np.cos)).values, 0) == 0
    assert max_err(conv(one, one).values, x) < 1e-13
    assert max_err(conv(g.sample(lambda t: t), one).values, x**2 / 2) < 1e-13
    assert conv(g.sample(np.cos), g.sample(np.sin)).values[0] == 0


@given(sample_arrays(33), sample_arrays(33))
def test_conv_commutes(u, v):
    g = Grid(32)
    a, b = SampledFunction(g, u), SampledFunction(g, v)
    assert max_err(conv(a, b).values, conv(b, a).values) <= 1e-12 * (1 + np.max(np.abs(u)) * np.max(np.abs(v)))


@given(sample_arrays(17), sample_arrays(17), sample_arrays(17), small_complex())
def test_conv_bilinear(u, v, z, c):
    g = Grid(16)
    a, b, d = SampledFunction(g, u), SampledFunction(g, v), SampledFunction(g, z)
    lhs = conv(a + c * b, d).values
    rhs = conv(a, d).values + c * conv(b, d).values
    assert max_err(lhs, rhs) <= 1e-10 * (1 + np.max(np.abs(lhs)))


def test_conv_powers_of_one_are_monomials():
    g = Grid(512)
    x = g.points
    stack = conv_powers(g.constant(1.0), nu_max=6)
    assert np.array_equal(stack.power(1).values, g.constant(1.0).values)
    for nu in range(2, 7):
        exact = x ** (nu - 1) / math.factorial(nu - 1)
        assert max_err(stack.power(nu).values, exact) < 10 * g.step**2


def test_conv_powers_of_identity_and_zero():
    g = Grid(512)
    stack = conv_powers(g.sample(lambda t: t), nu_max=2)
    assert max_err(stack.power(2).values, g.points**3 / 6) < 10 * g.step**2
    assert not np.any(conv_powers(g.zeros(), nu_max=4).powers)


def test_conv_powers_adaptive_and_invalid():
    g = Grid(128)
    stack = conv_powers(g.constant(1.0))
    assert stack.tail_bound() < 1e-12 or stack.nu_max == 200
    assert 10 < stack.nu_max < 60
    with pytest.raises(InputError):
        conv_powers(g.constant(1.0), nu_max=0)


def test_conv_power_recurrence():
    g = Grid(64)
    N = g.sample(lambda t: np.cos(t) + 0.3j)
    stack = conv_powers(N, nu_max=5)
    for nu in range(1, 5):
        assert np.array_equal(stack.power(nu + 1).values, conv(N, stack.power(nu)).values)


def test_n_to_m_closed_forms():
    g = Grid(512)
    x = g.points
    assert not np.any(n_to_m(g.zeros()).values)
    assert max_err(n_to_m(g.constant(1.0)).values, 2 - x**2 / 2) < 1e-12
    assert max_err(n_to_m(g.sample(lambda t: t)).values, 2 * x - x**4 / 24) < 10 * g.step**2


def test_m_to_n_closed_forms():
    g = Grid(512)
    x = g.points
    assert not np.any(m_to_n(g.zeros()).values)
    assert max_err(m_to_n(g.sample(lambda t: 2 - t**2 / 2)).values, 1.0) < 1e-12
    assert max_err(m_to_n(g.sample(lambda t: 2 * t - t**4 / 24)).values, x) < 10 * g.step**2


@given(small_complex(), small_complex(), small_complex())
def test_m_to_n_inverts_n_to_m(a, b, c):
    g = Grid(64)
    N = g.sample(lambda t: a + b * t + c * np.sin(t))
    assert max_err(m_to_n(n_to_m(N)).values, N.values) <= 1e-11 * (1 + np.max(np.abs(N.values))) ** 3


def _bessel_P(a, b):
    """sum_nu a^nu b^(nu-1) / (nu! (nu-1)!) = sqrt(a/b) I_1(2 sqrt(ab)), with limit a at b = 0."""
    with np.errstate(invalid="ignore", divide="ignore"):
        z = 2 * np.sqrt(a * b)
        out = np.where(b > 0, np.sqrt(a / np.where(b > 0, b, 1)) * i1(z), a)
    return out


def test_transformation_kernel_of_one_matches_bessel():
    g = Grid(256)
    x = g.points
    P = transformation_kernel(g.constant(1.0))
    i, j = np.tril_indices(g.size)
    a, b = x[i] - x[j], x[j]
    assert max_err(P.values[i, j], _bessel_P(a, b)) < 20 * g.step**2
    assert max_err(np.diagonal(P.values), 0) == 0


def test_transformation_kernel_of_zero():
    g = Grid(32)
    assert not np.any(transformation_kernel(g.zeros()).values)


def test_kernels_at_pi_trivial():
    g = Grid(64)
    sl = kernels_at_pi(g.zeros())
    assert not np.any(sl.P.values)
    assert np.all(sl.R.values == 1) and np.all(sl.Q.values == 1)
    assert max_err(sl.K.values, g.points) < 1e-14
    assert abs(sl.K.values[-1] - math.pi) < 1e-14 and sl.R.values[-1] == 1


def test_q_slice_of_one_matches_bessel():
    g = Grid(512)
    x = g.points
    sl = kernels_at_pi(g.constant(1.0))
    exact = i0(2 * np.sqrt((math.pi - x) * x))  # 1 + sum (pi-x)^nu x^nu / (nu!)^2
    assert max_err(sl.Q.values, exact) < 50 * g.step**2


def test_p_slice_is_last_kernel_row():
    g = Grid(128)
    N = g.sample(lambda t: np.sin(t) + 0.5j * t)
    stack = conv_powers(N)
    P = transformation_kernel(N, stack=stack)
    sl = kernels_at_pi(N, stack=stack)
    assert max_err(sl.P.values, P.values[-1]) < 1e-13


@pytest.mark.parametrize("lam", [4.0, -2.5, 3 + 1j])
def test_representations_reduce_to_trig_for_zero_kernel(lam):
    g = Grid(64)
    x = g.points
    kern = representation_kernels(g.zeros())
    sp = SpectralPoint.from_lambda(lam)
    r = sp.rho
    assert max_err(eval_S(kern, sp), np.sin(r * x) / r) < 1e-13
    assert max_err(eval_S_prime(kern, sp), np.cos(r * x)) < 1e-13
    assert max_err(eval_C(kern, sp), np.cos(r * x)) < 1e-13
    assert max_err(eval_C_prime(kern, sp), -r * np.sin(r * x)) < 1e-12


def test_representation_at_rho_zero():
    g = Grid(32)
    kern = representation_kernels(g.zeros())
    assert max_err(eval_S(kern, 0.0), g.points) < 1e-14


def _errors_at(n, N_func, lam):
    g = Grid(n)
    N = g.sample(N_func)
    kern = representation_kernels(N)
    S = eval_S(kern, lam)
    C = eval_C(kern, lam)
    identity = max_err(C, 1 - lam * cumulative_trapezoid(S, g.step))
    two_forms = max_err(S, eval_S_from_transformation(kern.P, lam))
    return identity, two_forms


@pytest.mark.parametrize("N_func", [lambda t: 1 + 0 * t, lambda t: np.cos(t) + 0.2j * t])
def test_c_identity_and_two_forms_are_second_order(N_func):
    coarse = _errors_at(64, N_func, 4.0)
    fine = _errors_at(128, N_func, 4.0)
    for c, f in zip(coarse, fine):
        assert f < 1e-3
        assert f < c / 3 or f < 1e-12


def test_eval_S_matches_marching_solver():
    for n in (128, 256):
        g = Grid(n)
        N = g.constant(1.0)
        S_rep = eval_S(representation_kernels(N), 4.0)
        S_ivp = solve_ivp(n_to_m(N), 0.0, 1.0, 4.0).y.values
        err = max_err(S_rep, S_ivp)
        if n == 128:
            first = err
    assert err < 1e-3 and err < first / 3
