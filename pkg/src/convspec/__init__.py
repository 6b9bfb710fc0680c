"""Spectral analysis of the convolution integro-differential operator

    -y'' + int_0^x M(x - t) y'(t) dt,   y'(0) - h y(0) = 0,  y'(pi) + H y(pi) = 0,

on ``(0, pi)``: forward eigenvalue computation and recovery of ``M`` (and ``H``)
from the spectrum.
"""

__version__ = "0.1.0"

from .errors import ConvergenceError, ConvspecError, GridMismatchError, InputError, MultipleRootError
from .forward import (
    CharFnModel,
    char_fn_direct,
    char_fn_model_from_kernel,
    char_fn_model_from_potential,
    find_spectrum,
    solve_ivp,
)
from .grid import BoundaryCoefficients, Grid, SampledFunction, SpectralPoint, Spectrum
from .inverse import (
    InverseSolution,
    MainEquationData,
    algorithm_1,
    algorithm_2,
    evaluate_main_rhs,
    solve_main_equation,
)
from .io import RunManifest, read_function, read_manifest, read_spectrum, write_function, write_spectrum
from .reconstruction import alpha_from_spectrum, fourier_data, product_char_fn, w_from_spectrum
from .volterra import conv, conv_powers, kernels_at_pi, m_to_n, n_to_m, transformation_kernel

__all__ = [
    "BoundaryCoefficients",
    "CharFnModel",
    "ConvergenceError",
    "ConvspecError",
    "Grid",
    "GridMismatchError",
    "InputError",
    "InverseSolution",
    "MainEquationData",
    "MultipleRootError",
    "RunManifest",
    "SampledFunction",
    "SpectralPoint",
    "Spectrum",
    "algorithm_1",
    "algorithm_2",
    "alpha_from_spectrum",
    "char_fn_direct",
    "char_fn_model_from_kernel",
    "char_fn_model_from_potential",
    "conv",
    "conv_powers",
    "evaluate_main_rhs",
    "find_spectrum",
    "fourier_data",
    "kernels_at_pi",
    "m_to_n",
    "n_to_m",
    "product_char_fn",
    "read_function",
    "read_manifest",
    "read_spectrum",
    "solve_ivp",
    "solve_main_equation",
    "transformation_kernel",
    "w_from_spectrum",
    "write_function",
    "write_spectrum",
]
