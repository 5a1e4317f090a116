"""Field serialization: flat CSV (index coordinates + value) and the FHF1 binary.

Binary layout, all little-endian: magic ``b"FHF1"``, uint32 dim, float64
half-width ``L``, uint32 ``n``, then ``n^dim`` float64 values in C order.
"""

from __future__ import annotations

import csv
import io
import struct
from pathlib import Path

import numpy as np

from .field import Field, FieldError, GridSpec

__all__ = ["dumps_bin", "dumps_csv", "loads_bin", "loads_csv", "read_field", "write_field"]

MAGIC = b"FHF1"
_HEADER = struct.Struct("<4sIdI")


def dumps_bin(u: Field) -> bytes:
    g = u.grid
    return _HEADER.pack(MAGIC, g.dim, g.half_width, g.n) + u.values.astype("<f8").tobytes()


def loads_bin(data: bytes) -> Field:
    if len(data) < _HEADER.size:
        raise FieldError("truncated FHF1 header")
    magic, dim, L, n = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FieldError(f"bad magic {magic!r}")
    g = GridSpec(dim, L, n)
    body = data[_HEADER.size:]
    if len(body) != 8 * g.size:
        raise FieldError(f"expected {g.size} values, found {len(body) / 8:g}")
    return Field(g, np.frombuffer(body, dtype="<f8").reshape(g.shape))


def dumps_csv(u: Field) -> str:
    g = u.grid
    buf = io.StringIO()
    buf.write(f"# dim={g.dim} half_width={g.half_width!r} n={g.n}\n")
    w = csv.writer(buf, lineterminator="\n")
    idx = ["i", "j"][: g.dim]
    w.writerow(idx + ["value"])
    for pos, v in np.ndenumerate(u.values):
        w.writerow([*pos, repr(float(v))])
    return buf.getvalue()


def loads_csv(text: str) -> Field:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise FieldError("missing grid comment line")
    meta = dict(kv.split("=", 1) for kv in lines[0][1:].split())
    try:
        g = GridSpec(int(meta["dim"]), float(meta["half_width"]), int(meta["n"]))
    except KeyError as exc:
        raise FieldError(f"grid comment lacks {exc}") from exc
    rows = list(csv.reader(lines[1:]))
    vals = np.full(g.shape, np.nan)
    for r in rows[1:]:
        *pos, v = r
        vals[tuple(int(p) for p in pos)] = float(v)
    if np.isnan(vals).any():
        raise FieldError("CSV does not cover the whole grid")
    return Field(g, vals)


def write_field(path: str | Path, u: Field) -> None:
    """CSV when the suffix is ``.csv``, FHF1 otherwise."""
    path = Path(path)
    if path.suffix == ".csv":
        path.write_text(dumps_csv(u), newline="\n")
    else:
        path.write_bytes(dumps_bin(u))


def read_field(path: str | Path) -> Field:
    path = Path(path)
    if path.suffix == ".csv":
        return loads_csv(path.read_text())
    return loads_bin(path.read_bytes())
