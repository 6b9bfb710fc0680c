import json

import numpy as np
import pytest

from convspec import Grid, GridMismatchError, Spectrum
from convspec.io import (
    RunManifest,
    SchemaError,
    read_function,
    read_manifest,
    read_spectrum,
    write_function,
    write_manifest,
    write_spectrum,
)
from convspec.errors import InputError


def test_function_round_trip_is_exact(tmp_path):
    g = Grid(8)
    f = g.sample(lambda x: np.exp(1j * x) / 3 + 1)
    write_function(f, tmp_path / "f.csv")
    back = read_function(tmp_path / "f.csv")
    assert back.grid == g
    assert np.array_equal(back.values, f.values)


def test_constant_round_trip(tmp_path):
    f = Grid(8).constant(1.0)
    write_function(f, tmp_path / "one.csv")
    assert np.array_equal(read_function(tmp_path / "one.csv", n=8).values, f.values)


def test_missing_column_names_row(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,re,im\n0.0,1.0\n")
    with pytest.raises(SchemaError) as err:
        read_function(p)
    assert err.value.row == 2


def test_nan_is_rejected(tmp_path):
    p = tmp_path / "nan.csv"
    write_function(Grid(4).zeros(), p)
    lines = p.read_text().splitlines()
    lines[3] = lines[3].split(",")[0] + ",nan,0.0"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaError, match="non-finite") as err:
        read_function(p)
    assert err.value.row == 4


def test_grid_checks(tmp_path):
    p = tmp_path / "f.csv"
    write_function(Grid(8).zeros(), p)
    with pytest.raises(GridMismatchError):
        read_function(p, n=16)
    lines = p.read_text().splitlines()
    lines[2] = "0.5,0.0,0.0"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaError, match="grid node"):
        read_function(p)


def test_wrong_header(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("t,re,im\n0,0,0\n")
    with pytest.raises(SchemaError):
        read_function(p)


def test_spectrum_round_trip_complex(tmp_path):
    s = Spectrum([0.25 + 0.1j, 1, 4, 9])
    write_spectrum(s, tmp_path / "s.csv")
    back = read_spectrum(tmp_path / "s.csv")
    assert back.values[0] == 0.25 + 0.1j
    assert back.K == 3 and np.all(back.kappa[1:] == 0)


def test_spectrum_dense_indices(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("k,re,im\n0,0,0\n1,1,0\n3,9,0\n")
    with pytest.raises(SchemaError, match="dense"):
        read_spectrum(p)


def test_manifest_round_trip_and_validation(tmp_path):
    m = RunManifest(n=64, h=0.5j, H=1.0, num_eigs=20)
    write_manifest(m, tmp_path / "m.json")
    assert read_manifest(tmp_path / "m.json") == m
    (tmp_path / "bad.json").write_text(json.dumps({"n": 64, "speed": 3}))
    with pytest.raises(InputError, match="unknown"):
        read_manifest(tmp_path / "bad.json")
    (tmp_path / "bad2.json").write_text(json.dumps({"h": "one"}))
    with pytest.raises(InputError):
        read_manifest(tmp_path / "bad2.json")
    (tmp_path / "bad3.json").write_text("{not json")
    with pytest.raises(InputError):
        read_manifest(tmp_path / "bad3.json")
