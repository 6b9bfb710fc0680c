"""Command-line entry point.

Subcommands ``forward``, ``inverse1``, ``inverse2``, ``roundtrip`` and ``validate``
each print one JSON report on stdout and write data files to the paths given by
flags.  Exit codes: 0 success, 1 a check failed, 2 bad input, 3 a numerical
procedure did not converge.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, InputError
from .forward import find_spectrum
from .grid import Grid, Spectrum, l2_norm
from .inverse import algorithm_1, algorithm_2
from .io import RunManifest, SchemaError, read_function, read_manifest, read_spectrum, write_function, write_spectrum
from .validation import run_checks

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_NONCONVERGENCE = 0, 1, 2, 3
ROUNDTRIP_FRACTION = 0.9  # kernel error is measured on [0, 0.9 pi]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else str(value)
    return obj


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest(args) -> RunManifest:
    m = read_manifest(args.manifest) if getattr(args, "manifest", None) else RunManifest()
    if getattr(args, "num_eigs", None) is not None:
        m = replace(m, num_eigs=args.num_eigs)
    if getattr(args, "grid_n", None) is not None:
        m = replace(m, n=args.grid_n)
    if m.num_eigs < 1 or m.n < 1:
        raise InputError("num_eigs and n must be positive")
    return m


def _read_kernel(args):
    return read_function(args.kernel, n=args.grid_n)


def _inputs(args) -> dict:
    out = {}
    for name in ("manifest", "kernel", "spectrum"):
        path = getattr(args, name, None)
        if path:
            out[name] = {"path": str(path), "sha256": _digest(path)}
    return out


def _eigen_table(s: Spectrum, residuals=None) -> list:
    rows = []
    for k, (lam, kappa) in enumerate(zip(s.values, s.kappa)):
        row = {"k": k, "lambda": lam, "kappa": kappa}
        if residuals is not None:
            row["residual"] = residuals[k]
        rows.append(row)
    return rows


def cmd_forward(args) -> tuple[dict, int]:
    m = _manifest(args)
    M = _read_kernel(args)
    search = find_spectrum(M, m.bc, m.num_eigs, method=args.method, tol_res=m.tol_res, nu_max=m.nu_max, tol=m.tol, details=True)
    if args.out:
        write_spectrum(search.spectrum, args.out)
    results = {
        "n": M.grid.n,
        "num_eigs": m.num_eigs,
        "method": args.method,
        "eigenvalues": _eigen_table(search.spectrum, search.residuals),
        "outside_localization_disc": search.outside_disc,
    }
    return {"parameters": m.to_json(), "results": results}, EXIT_OK


def _load_spectrum(args, m: RunManifest) -> Spectrum:
    s = read_spectrum(args.spectrum, tail=m.tail)
    if s.K < 1:
        raise InputError("spectrum needs at least two eigenvalues")
    if args.num_eigs is not None:
        if args.num_eigs > s.K:
            raise InputError(f"--num-eigs {args.num_eigs} exceeds the {s.K} stored eigenvalues")
        s = s.truncated(args.num_eigs)
    return s


def _inverse_results(sol) -> dict:
    return {
        "n": sol.M.grid.n,
        "alpha": sol.alpha,
        "h": sol.bc.h,
        "H": sol.bc.H,
        "H_recovered": sol.H_recovered,
        "diagnostics": sol.diagnostics,
    }


def cmd_inverse1(args) -> tuple[dict, int]:
    m = _manifest(args)
    s = _load_spectrum(args, m)
    verify = None if args.no_verify else s.K
    sol = algorithm_1(s, m.bc, Grid(m.n), m.nu_max, m.tol, verify_K=verify, spectrum_tol=m.roundtrip_spectrum_tol)
    if args.out:
        write_function(sol.M, args.out)
    return {"parameters": m.to_json(), "results": _inverse_results(sol)}, EXIT_OK


def cmd_inverse2(args) -> tuple[dict, int]:
    m = _manifest(args)
    s = _load_spectrum(args, m)
    verify = None if args.no_verify else s.K
    sol = algorithm_2(s, Grid(m.n), m.nu_max, m.tol, verify_K=verify, spectrum_tol=m.roundtrip_spectrum_tol)
    if args.out:
        write_function(sol.M, args.out)
    return {"parameters": m.to_json(), "results": _inverse_results(sol)}, EXIT_OK


def cmd_roundtrip(args) -> tuple[dict, int]:
    m = _manifest(args)
    M = _read_kernel(args)
    grid = M.grid
    s = find_spectrum(M, m.bc, m.num_eigs, tol_res=m.tol_res, nu_max=m.nu_max, tol=m.tol)
    s = Spectrum(s.values, m.tail)
    if args.algorithm == 1:
        sol = algorithm_1(s, m.bc, grid, m.nu_max, m.tol)
        bc = m.bc
    else:
        if m.h != 0:
            raise InputError("roundtrip with algorithm 2 needs h = 0 in the manifest")
        sol = algorithm_2(s, grid, m.nu_max, m.tol)
        bc = sol.bc
    s_back = find_spectrum(sol.M, bc, m.num_eigs, tol_res=m.tol_res, nu_max=m.nu_max, tol=m.tol)
    upto = grid.index_upto(ROUNDTRIP_FRACTION * math.pi)
    err = l2_norm(sol.M.values - M.values, grid, upto=upto)
    ref = l2_norm(M.values, grid, upto=upto)
    kernel_err = err / ref if ref > 0 else err
    spec_dev = float(np.max(np.abs(s_back.values - s.values)))
    passed = kernel_err <= m.roundtrip_kernel_tol and spec_dev <= m.roundtrip_spectrum_tol
    results = {
        "algorithm": args.algorithm,
        "n": grid.n,
        "num_eigs": m.num_eigs,
        "kernel_l2_error": kernel_err,
        "kernel_error_relative": ref > 0,
        "kernel_error_interval": [0.0, ROUNDTRIP_FRACTION * math.pi],
        "spectrum_max_deviation": spec_dev,
        "H_recovered": sol.H_recovered,
        "diagnostics": sol.diagnostics,
        "passed": passed,
    }
    if args.out:
        write_function(sol.M, args.out)
    return {"parameters": m.to_json(), "results": results}, EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_validate(args) -> tuple[dict, int]:
    m = _manifest(args)
    M = _read_kernel(args)
    checks = run_checks(M, m.bc, m.num_eigs, m.two_path_tol, m.identity_tol, m.product_tol, m.min_order_ratio)
    passed = all(c.passed for c in checks)
    results = {"n": M.grid.n, "checks": [c.to_json() for c in checks], "passed": passed}
    return {"parameters": m.to_json(), "results": results}, EXIT_OK if passed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convspec", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, kernel=False, spectrum=False):
        p.add_argument("--manifest", type=Path, help="run manifest (JSON)")
        if kernel:
            p.add_argument("--kernel", type=Path, required=True, help="kernel M as CSV x,re,im")
        if spectrum:
            p.add_argument("--spectrum", type=Path, required=True, help="eigenvalues as CSV k,re,im")
        p.add_argument("--out", type=Path, help="output data file")
        p.add_argument("--num-eigs", type=int, help="highest eigenvalue index K (overrides the manifest)")
        p.add_argument("--grid-n", type=int, help="grid intervals n (overrides the manifest; checked against kernel files)")
        p.add_argument("--timing", action="store_true", help="add wall-clock time to the report (breaks byte-identity)")

    p = sub.add_parser("forward", help="eigenvalues of L(M, h, H)")
    common(p, kernel=True)
    p.add_argument("--method", choices=("model", "direct"), default="model")
    p.set_defaults(func=cmd_forward)

    for name, func, helptext in (
        ("inverse1", cmd_inverse1, "recover M from the spectrum with h, H known"),
        ("inverse2", cmd_inverse2, "recover M and H from the spectrum, h = 0"),
    ):
        p = sub.add_parser(name, help=helptext)
        common(p, spectrum=True)
        p.add_argument("--no-verify", action="store_true", help="skip the forward consistency check")
        p.set_defaults(func=func)

    p = sub.add_parser("roundtrip", help="forward, inverse, forward; report kernel and spectrum errors")
    common(p, kernel=True)
    p.add_argument("--algorithm", type=int, choices=(1, 2), default=1)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("validate", help="cross-representation checks of the forward solver")
    common(p, kernel=True)
    p.set_defaults(func=cmd_validate)
    return parser


def _error_object(exc: Exception) -> dict:
    err = {"type": type(exc).__name__, "message": str(exc)}
    for attr in ("row", "index", "residual"):
        value = getattr(exc, attr, None)
        if value is not None:
            err[attr] = value
    return err


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    report = {"command": args.command}
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            report["inputs"] = _inputs(args)
            body, code = args.func(args)
            report.update(body)
        except (InputError, SchemaError, OSError) as exc:
            report["error"], code = _error_object(exc), EXIT_INPUT
        except ConvergenceError as exc:
            report["error"], code = _error_object(exc), EXIT_NONCONVERGENCE
    seen = []
    for w in caught:
        text = f"{w.category.__name__}: {w.message}"
        if text not in seen:
            seen.append(text)
    report["warnings"] = seen
    report["exit_code"] = code
    if args.timing:
        report["elapsed_seconds"] = time.perf_counter() - start
    print(json.dumps(_jsonable(report), indent=2, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
