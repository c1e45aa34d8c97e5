"""Serialization: raw field binaries, CSV, 8-bit PNG with sidecars, matrices
and solver reports.

Raw field format: 32-byte header ``magic "IQF1" | n uint32 | pitch float64 |
kind 16 bytes`` (little-endian, kind null-padded ASCII), then the n*n values
as little-endian float64 in row-major order.

PNG output is min/max normalized to 8-bit grayscale; the normalization is
recorded in a ``.txt`` sidecar so the figure stays quantitatively
recoverable.  Constant fields map to mid-gray.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .grid import Grid, ScalarField
from .reconstruct import ReconstructionReport
from .sensors import Measurement
from .zernike import ZernikeIndex

__all__ = [
    "write_field",
    "read_field",
    "write_field_csv",
    "read_field_csv",
    "write_field_png",
    "write_measurement",
    "write_matrix",
    "read_matrix",
    "write_report",
]

_MAGIC = b"IQF1"
_HEADER = struct.Struct("<4sId16s")
assert _HEADER.size == 32


def write_field(path, f: ScalarField, kind: str = "field") -> None:
    """Raw little-endian binary with the 32-byte header."""
    kind_b = kind.encode("ascii")[:16].ljust(16, b"\0")
    header = _HEADER.pack(_MAGIC, f.grid.n, f.grid.pitch, kind_b)
    data = np.ascontiguousarray(f.values, dtype="<f8").tobytes()
    Path(path).write_bytes(header + data)


def read_field(path, pad_factor: int = 2) -> tuple[ScalarField, str]:
    """Read a raw field file; returns the field and its kind tag."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated field file")
    magic, n, pitch, kind_b = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 8 * n * n
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    vals = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(n, n).copy()
    grid = Grid(n=n, pitch=pitch, pad_factor=pad_factor)
    return ScalarField(grid, vals), kind_b.rstrip(b"\0").decode("ascii")


def write_field_csv(path, f: ScalarField) -> None:
    """Plain CSV (one grid row per line); intended for small grids."""
    np.savetxt(path, f.values, delimiter=",", header=f"n={f.grid.n} pitch={f.grid.pitch!r}")


def read_field_csv(path, pitch: float, pad_factor: int = 2) -> ScalarField:
    vals = np.loadtxt(path, delimiter=",")
    grid = Grid(n=vals.shape[0], pitch=pitch, pad_factor=pad_factor)
    return ScalarField(grid, vals)


def write_field_png(path, f: ScalarField, kind: str = "field") -> None:
    """8-bit grayscale PNG plus a sidecar recording the normalization."""
    vmin, vmax = float(f.values.min()), float(f.values.max())
    if vmax > vmin:
        img = np.round((f.values - vmin) / (vmax - vmin) * 255.0).astype(np.uint8)
    else:
        img = np.full(f.values.shape, 128, dtype=np.uint8)
    Image.fromarray(img.T[::-1], mode="L").save(path)  # y up in the image
    sidecar = Path(str(path) + ".txt")
    sidecar.write_text(
        f"kind={kind}\nn={f.grid.n}\npitch={f.grid.pitch!r}\nmin={vmin!r}\nmax={vmax!r}\n"
    )


def write_measurement(path_stem, m: Measurement) -> list[str]:
    """Write each field of a measurement plus a sidecar with kind/flux_norm.

    Returns the written file names.
    """
    stem = Path(path_stem)
    written = []
    suffixes = [""] if len(m.fields) == 1 else [f"-{i}" for i in range(len(m.fields))]
    for suffix, f in zip(suffixes, m.fields):
        p = stem.with_name(stem.name + suffix + ".iqf")
        write_field(p, f, kind=m.kind)
        written.append(str(p))
    sidecar = stem.with_name(stem.name + ".meta.txt")
    sidecar.write_text(f"kind={m.kind}\nflux_norm={m.flux_norm!r}\nfields={len(m.fields)}\n")
    written.append(str(sidecar))
    return written


def write_matrix(path, matrix: np.ndarray, basis: list[ZernikeIndex], mask) -> None:
    """Raw column-major float64 matrix with a text sidecar."""
    arr = np.asfortranarray(matrix, dtype="<f8")
    Path(path).write_bytes(arr.tobytes(order="F"))
    mask_hash = hashlib.sha256(np.ascontiguousarray(mask.indicator).tobytes()).hexdigest()
    basis_s = ";".join(f"{z.n},{z.m}" for z in basis)
    Path(str(path) + ".txt").write_text(
        f"rows={matrix.shape[0]}\ncols={matrix.shape[1]}\nbasis={basis_s}\nmask_sha256={mask_hash}\n"
    )


def read_matrix(path) -> tuple[np.ndarray, list[ZernikeIndex]]:
    meta = {}
    for line in Path(str(path) + ".txt").read_text().splitlines():
        k, _, v = line.partition("=")
        meta[k] = v
    rows, cols = int(meta["rows"]), int(meta["cols"])
    raw = np.frombuffer(Path(path).read_bytes(), dtype="<f8")
    matrix = raw.reshape((rows, cols), order="F").copy()
    basis = []
    if meta.get("basis"):
        for tok in meta["basis"].split(";"):
            n, m = tok.split(",")
            basis.append(ZernikeIndex(int(n), int(m)))
    return matrix, basis


def write_report(path, report: ReconstructionReport, extra: Optional[dict] = None) -> None:
    """Key/value JSON document with the residual history."""
    doc = {
        "method": report.method,
        "iterations": report.iterations,
        "converged": report.converged,
        "stagnated": report.stagnated,
        "diverged": report.diverged,
        "rel_error": report.rel_error,
        "wall_time": report.wall_time,
        "notes": report.notes,
        "residuals": list(report.residuals),
    }
    if report.coefficients is not None:
        doc["coefficients"] = [float(c) for c in report.coefficients]
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
