"""Binary field snapshots, JSON sidecars and CSV slices.

Layout of a ``.bin`` file (all little-endian)::

    8 bytes   magic  b"DHFIELD1"
    uint32    d
    uint32    N
    uint32    n        spinor components
    uint32    space    0 physical, 1 frequency
    float64   L
    uint32    bytes per complex sample (16 = float64 pairs, 8 = float32 pairs)
    uint32    reserved (0)
    payload   N^d * n complex samples, C order over (x_1, ..., x_d, component)

Double precision is the default so that norms survive a round trip to
machine precision; single precision can be requested for compact output.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .grid import Space, SpectralGrid, SpinorField

MAGIC = b"DHFIELD1"
_HEADER = struct.Struct("<8sIIIIdII")
_DTYPES = {16: np.dtype("<c16"), 8: np.dtype("<c8")}
_SPACES = {Space.PHYSICAL: 0, Space.FREQUENCY: 1}


class FieldFormatError(ValueError):
    pass


def write_field(path, f: SpinorField, precision: str = "double", meta: dict | None = None) -> Path:
    """Write ``f`` to ``path`` plus a ``path.json`` sidecar; returns the path."""
    width = {"double": 16, "single": 8}[precision]
    path = Path(path)
    g = f.grid
    header = _HEADER.pack(MAGIC, g.d, g.N, f.n, _SPACES[f.space], float(g.L), width, 0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.data, dtype=_DTYPES[width]).tobytes())
    side = {"grid": g.to_dict(), "n": f.n, "space": f.space.value, "precision": precision,
            "meta": {**f.meta, **(meta or {})}}
    Path(str(path) + ".json").write_text(json.dumps(side, indent=2, sort_keys=True, default=str))
    return path


def read_field(path) -> SpinorField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FieldFormatError(f"{path}: file too short for a field header")
    magic, d, N, n, space, L, width, _ = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FieldFormatError(f"{path}: bad magic {magic!r}")
    if width not in _DTYPES or space not in (0, 1):
        raise FieldFormatError(f"{path}: unsupported sample width {width} or space tag {space}")
    grid = SpectralGrid(d, N, L)
    count = N**d * n
    payload = raw[_HEADER.size :]
    if len(payload) != count * width:
        raise FieldFormatError(f"{path}: payload has {len(payload)} bytes, expected {count * width}")
    data = np.frombuffer(payload, dtype=_DTYPES[width]).astype(complex).reshape(grid.shape + (n,))
    meta = {}
    side = Path(str(path) + ".json")
    if side.exists():
        meta = json.loads(side.read_text()).get("meta", {})
    return SpinorField(grid, data, Space.FREQUENCY if space else Space.PHYSICAL, meta)


def write_slice_csv(path, f: SpinorField, axis_values: dict | None = None) -> Path:
    """CSV of a 1-d field, or of the ``x_2 = 0`` (closest node) line of a higher-d field.

    Columns: coordinate, modulus, then real/imag of every component.
    """
    path = Path(path)
    g = f.grid
    coords = g.nodes if f.space is Space.PHYSICAL else g.freqs
    idx = [int(np.argmin(np.abs(coords - (axis_values or {}).get(k, 0.0)))) for k in range(1, g.d)]
    line = f.data[(slice(None),) + tuple(idx)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        label = "x" if f.space is Space.PHYSICAL else "xi"
        w.writerow([label, "modulus"] + [f"{part}{k}" for k in range(f.n) for part in ("re", "im")])
        mod = np.sqrt(np.sum(np.abs(line) ** 2, axis=-1))
        for c, m, row in zip(coords, mod, line):
            w.writerow([repr(float(c)), repr(float(m))] + [repr(float(v)) for z in row for v in (z.real, z.imag)])
    return path
