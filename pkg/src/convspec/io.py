"""CSV and JSON formats: sampled functions, spectra and run manifests.

Function CSV: header ``x,re,im`` and ``n+1`` rows with ``x`` ascending from 0 to pi.
Spectrum CSV: header ``k,re,im`` with dense indices ``k = 0..K``.
Run manifest: ``{"n", "h": [re, im], "H": [re, im], "num_eigs", "nu_max", "tol"}``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import GridMismatchError, InputError
from .grid import BoundaryCoefficients, Grid, SampledFunction, Spectrum, TailConvention

FUNCTION_HEADER = ("x", "re", "im")
SPECTRUM_HEADER = ("k", "re", "im")


class SchemaError(InputError):
    """A file does not match its CSV or JSON schema; ``row`` is the 1-based line number."""

    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


def _fmt(value: float) -> str:
    return repr(float(value))


def _read_rows(path, header):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if tuple(c.strip() for c in first) != header:
            raise SchemaError(f"{path}: expected header {','.join(header)}, got {','.join(first)}", row=1)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise SchemaError(f"expected {len(header)} columns, got {len(row)}", row=lineno)
            try:
                parsed = [float(c) for c in row]
            except ValueError:
                raise SchemaError(f"unparsable number in {row!r}", row=lineno) from None
            if not all(math.isfinite(c) for c in parsed):
                raise SchemaError("non-finite value", row=lineno)
            rows.append((lineno, parsed))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_function(path, n: int | None = None) -> SampledFunction:
    """Read a function CSV.

    Parameters
    ----------
    path : str or Path
    n : int, optional
        Expected number of intervals; a different row count raises
        :class:`GridMismatchError`.

    Returns
    -------
    SampledFunction

    Raises
    ------
    SchemaError
        Wrong header, column count, unparsable or non-finite entry, or ``x`` off the grid.
    """
    rows = _read_rows(path, FUNCTION_HEADER)
    grid = Grid(len(rows) - 1)
    if n is not None and n != grid.n:
        raise GridMismatchError(f"{path}: file has n={grid.n}, expected n={n}")
    x = np.array([r[1][0] for r in rows])
    tol = 1e-9 * math.pi
    for (lineno, _), xi, ref in zip(rows, x, grid.points):
        if abs(xi - ref) > tol:
            raise SchemaError(f"x={xi!r} does not match grid node {ref!r} for n={grid.n}", row=lineno)
    values = np.array([complex(r[1][1], r[1][2]) for r in rows])
    return SampledFunction(grid, values)


def write_function(f: SampledFunction, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FUNCTION_HEADER)
        for xi, v in zip(f.grid.points, f.values):
            w.writerow([_fmt(xi), _fmt(v.real), _fmt(v.imag)])


def read_spectrum(path, tail: TailConvention = "asymptotic") -> Spectrum:
    """Read a spectrum CSV; indices must run ``0, 1, ..., K`` without gaps."""
    rows = _read_rows(path, SPECTRUM_HEADER)
    values = []
    for expected, (lineno, (k, re, im)) in enumerate(rows):
        if k != expected:
            raise SchemaError(f"indices must be dense from 0: expected k={expected}, got {k:g}", row=lineno)
        values.append(complex(re, im))
    return Spectrum(np.array(values), tail)


def write_spectrum(s: Spectrum, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPECTRUM_HEADER)
        for k, v in enumerate(s.values):
            w.writerow([k, _fmt(v.real), _fmt(v.imag)])


@dataclass(frozen=True)
class RunManifest:
    """Run parameters shared by the CLI subcommands.

    Attributes
    ----------
    n : int
        Number of grid intervals on ``[0, pi]``.
    h, H : complex
        Boundary coefficients.
    num_eigs : int
        Highest eigenvalue index ``K`` computed or used.
    nu_max : int or None
        Fixed truncation of the convolution-power series; ``None`` is adaptive.
    tol : float
        Truncation tolerance of the convolution-power series.
    tol_res : float
        Eigenvalue acceptance: ``|Delta| <= tol_res (1 + |lam|)``.
    two_path_tol, identity_tol, product_tol, min_order_ratio : float
        Pass thresholds of the ``validate`` checks.
    roundtrip_kernel_tol, roundtrip_spectrum_tol : float
        Pass thresholds of ``roundtrip``: relative L2 error of ``M`` on
        ``[0, 0.9 pi]`` and maximum eigenvalue deviation.
    tail : {"asymptotic", "squares"}
        Convention for eigenvalues beyond ``K`` in spectrum files.
    """

    n: int = 512
    h: complex = 0.0
    H: complex = 0.0
    num_eigs: int = 100
    nu_max: int | None = None
    tol: float = 1e-12
    tol_res: float = 1e-9
    two_path_tol: float = 5e-4
    identity_tol: float = 1e-6
    product_tol: float = 1e-2
    min_order_ratio: float = 3.0
    roundtrip_kernel_tol: float = 1e-2
    roundtrip_spectrum_tol: float = 1e-3
    tail: str = "asymptotic"

    def __post_init__(self):
        if self.tail not in ("asymptotic", "squares"):
            raise InputError(f"manifest field 'tail' must be 'asymptotic' or 'squares', got {self.tail!r}")

    @property
    def bc(self) -> BoundaryCoefficients:
        return BoundaryCoefficients(self.h, self.H)

    def to_json(self) -> dict:
        d = asdict(self)
        d["h"] = [self.h.real, self.h.imag]
        d["H"] = [self.H.real, self.H.imag]
        return d


def _complex_field(raw, name):
    if isinstance(raw, (int, float)):
        return complex(raw)
    if isinstance(raw, (list, tuple)) and len(raw) == 2 and all(isinstance(c, (int, float)) for c in raw):
        return complex(raw[0], raw[1])
    raise InputError(f"manifest field {name!r} must be [re, im]")


def read_manifest(path) -> RunManifest:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise InputError(f"{path}: manifest must be a JSON object")
    known = set(RunManifest.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise InputError(f"{path}: unknown manifest keys {sorted(unknown)}")
    kwargs = dict(raw)
    for name in ("h", "H"):
        if name in kwargs:
            kwargs[name] = _complex_field(kwargs[name], name)
    for name in ("n", "num_eigs"):
        if name in kwargs and isinstance(kwargs[name], bool):
            raise InputError(f"manifest field {name!r} must be a positive integer")
        if name in kwargs and (not isinstance(kwargs[name], int) or kwargs[name] < 1):
            raise InputError(f"manifest field {name!r} must be a positive integer")
    if kwargs.get("nu_max") is not None and (not isinstance(kwargs["nu_max"], int) or kwargs["nu_max"] < 1):
        raise InputError("manifest field 'nu_max' must be a positive integer or null")
    return RunManifest(**kwargs)


def write_manifest(m: RunManifest, path) -> None:
    Path(path).write_text(json.dumps(m.to_json(), indent=2) + "\n")
