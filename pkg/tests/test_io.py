import json

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from att_tomo.analytic import monomial
from att_tomo.fields import DiscField, FiberField
from att_tomo.gauge import gauge_reduce
from att_tomo.io.atf_io import export_csv, load_csv, read_atf, write_atf
from att_tomo.io.store import (
    load_disc_field,
    load_representative,
    load_sinogram,
    save_disc_field,
    save_representative,
    save_sinogram,
)
from att_tomo.transport import xray_attenuated


def test_atf_round_trip(tmp_path, rng):
    arr = rng.normal(size=(3, 4, 5)) + 1j * rng.normal(size=(3, 4, 5))
    path = write_atf(tmp_path / "sub" / "x.atf", arr)
    raw = path.read_bytes()
    assert raw[:4] == b"ATF1"
    assert len(raw) == 4 + 4 * 4 + 16 * arr.size
    assert_array_equal(read_atf(path), arr)


def test_atf_errors(tmp_path):
    with pytest.raises(ValueError, match="Unsupported file type"):
        write_atf(tmp_path / "x.npy", np.zeros(2))
    with pytest.raises(FileNotFoundError):
        read_atf(tmp_path / "missing.atf")
    bad = tmp_path / "bad.atf"
    bad.write_bytes(b"NOPE" + b"\x00" * 12)
    with pytest.raises(ValueError, match="magic"):
        read_atf(bad)
    short = tmp_path / "short.atf"
    raw = write_atf(short, np.ones(4)).read_bytes()
    short.write_bytes(raw[:-8])
    with pytest.raises(ValueError, match="payload"):
        read_atf(short)


def test_csv_round_trip(tmp_path):
    vec = np.array([1 + 2j, -3.5j, 0.25])
    assert_array_equal(load_csv(export_csv(tmp_path / "v.csv", vec)), vec)
    mat = np.arange(6).reshape(2, 3) * (1 - 1j)
    assert_array_equal(load_csv(export_csv(tmp_path / "m.csv", mat)), mat)
    with pytest.raises(ValueError, match="rank 3"):
        export_csv(tmp_path / "t.csv", np.zeros((2, 2, 2)))


def test_sinogram_store(tmp_path, disc):
    sino = xray_attenuated(DiscField.from_analytic(disc.grid, monomial(1, 0)), 0.5, disc, name="Iz")
    path = save_sinogram(tmp_path / "sino.atf", sino)
    meta = json.loads((tmp_path / "sino.json").read_text())
    assert meta["kind"] == "sinogram"
    back = load_sinogram(path)
    assert_array_equal(back.samples, sino.samples)
    assert back.a_inf == sino.a_inf
    assert back.m == sino.m
    assert back.name == "Iz"
    with pytest.raises(ValueError, match="expected 'disc_field'"):
        load_disc_field(path)


def test_disc_field_store(tmp_path, grid):
    f = DiscField.from_analytic(grid, monomial(2, 1, 0.5j), "f")
    back = load_disc_field(save_disc_field(tmp_path / "f.atf", f))
    assert back.grid == grid
    assert back.name == "f"
    assert_array_equal(back.values, f.values)


def test_representative_store(tmp_path, grid):
    f = FiberField.from_modes(grid, 2, {0: 1.0, 1: monomial(0, 1), -2: monomial(1, 0)})
    g = gauge_reduce(f, 0.3)
    save_representative(tmp_path / "rep", g)
    assert (tmp_path / "rep" / "g1p.atf").exists()
    assert (tmp_path / "rep" / "g2m.atf").exists()
    back = load_representative(tmp_path / "rep")
    assert back.m == 2
    assert back.component_names() == g.component_names()
    assert max(back.relative_errors(g).values()) == 0.0
    with pytest.raises(FileNotFoundError):
        load_representative(tmp_path / "nothing")
