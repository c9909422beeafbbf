import json
import math

import numpy as np
import pytest

from dirac_hartree.config import ConfigError, RunConfig, parse_text
from dirac_hartree.fieldio import FieldFormatError, read_field, write_field, write_slice_csv
from dirac_hartree.grid import Gaussian, Space, SpectralGrid, fft, lebesgue_norm, sample


def field(d=1, N=64, L=8.0):
    return sample(Gaussian(1.0, modulation=(1.0,) * d, weights=(1, 0.5j)), SpectralGrid(d, N, L), 2)


@pytest.mark.parametrize("d", [1, 2])
def test_round_trip_is_exact_in_double(tmp_path, d):
    f = field(d, N=32 if d == 2 else 64)
    path = write_field(tmp_path / "f.bin", f, meta={"tag": "x"})
    g = read_field(path)
    assert g.grid == f.grid and g.space is Space.PHYSICAL
    np.testing.assert_array_equal(g.data, f.data)
    assert g.meta["tag"] == "x"
    side = json.loads((tmp_path / "f.bin.json").read_text())
    assert side["precision"] == "double" and side["n"] == 2


def test_single_precision_and_frequency_tag(tmp_path):
    f = fft(field())
    g = read_field(write_field(tmp_path / "f.bin", f, precision="single"))
    assert g.space is Space.FREQUENCY
    assert lebesgue_norm(g - f, 2) / lebesgue_norm(f, 2) < 1e-6


def test_corrupt_files_are_rejected(tmp_path):
    p = write_field(tmp_path / "f.bin", field())
    raw = bytearray(p.read_bytes())
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"NOTFIELD" + bytes(raw[8:]))
    with pytest.raises(FieldFormatError, match="magic"):
        read_field(bad)
    bad.write_bytes(bytes(raw[:-16]))
    with pytest.raises(FieldFormatError, match="payload"):
        read_field(bad)
    bad.write_bytes(b"abc")
    with pytest.raises(FieldFormatError):
        read_field(bad)


def test_slice_csv(tmp_path):
    f = field()
    p = write_slice_csv(tmp_path / "s.csv", f)
    rows = p.read_text().splitlines()
    assert rows[0] == "x,modulus,re0,im0,re1,im1" and len(rows) == 65
    x, mod = map(float, rows[33].split(",")[:2])
    assert x == f.grid.nodes[32] and mod == pytest.approx(float(np.linalg.norm(f.data[32])))


def test_config_defaults_file_and_flags(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# comment\nT = 0.2\nnorm.q = 4/3   # trailing\ndata.modulation = 1.5\n")
    cfg = RunConfig.load(cfg_file, ["T=0.05", "lambda = -1"])
    assert cfg["T"] == 0.05 and cfg.provenance["T"] == "flag"
    assert cfg["norm.q"] == 4 / 3 and cfg.provenance["norm.q"] == "file"
    assert cfg["lambda"] == -1.0 and cfg["mass"] == 1.0 and cfg.provenance["mass"] == "default"
    assert cfg["data.modulation"] == (1.5,)
    res = cfg.resolved()
    assert res["T"] == {"value": 0.05, "source": "flag"}
    assert cfg.get("norm.q") == 4 / 3 and cfg.get("threads", 3) == 3


def test_config_text_round_trip():
    cfg = RunConfig.load(None, ["data.weights=1, 0.5j", "norm.p=inf", "data.center=1 2"])
    again = RunConfig.load(None, [])
    again.update(parse_text(cfg.to_text()), "file")
    assert again.values == cfg.values
    assert cfg["norm.p"] == math.inf and cfg.resolved()["norm.p"]["value"] == "inf"


@pytest.mark.parametrize("text,match", [
    ("bogus = 1\n", "unknown"),
    ("T = fast\n", "bad value"),
    ("T = 1\nT = 2\n", "duplicate"),
    ("just words\n", "expected"),
])
def test_config_errors(tmp_path, text, match):
    p = tmp_path / "c.cfg"
    p.write_text(text)
    with pytest.raises(ConfigError, match=match):
        RunConfig.load(p)
