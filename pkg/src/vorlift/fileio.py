"""VF2D file format: JSON header plus sibling little-endian float64 binary.

The header ``X.vf2d`` stores grid geometry and the mask kind; node data live
in ``X.vf2d.bin`` as row-major (y outer, x inner), component-interleaved
float64.  Round trips are bit exact.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import DataError
from .grid import CircleValuedField, GridSpec, VectorField2D

MAGIC = "VF2D"
VERSION = 1


def _binary_path(header_path):
    return str(header_path) + ".bin"


def _grid_from_header(hdr):
    kind = hdr["mask"]
    if kind not in ("disk", "rect"):
        raise DataError(f"unsupported mask kind {kind!r} in VF2D header")
    return GridSpec(hdr["x0"], hdr["y0"], hdr["h"], hdr["nx"], hdr["ny"], kind)


def _check_serializable(grid):
    if grid.mask_kind not in ("disk", "rect"):
        raise DataError("only disk/rect masks are serializable as VF2D")


def _write(path, grid, arrays):
    _check_serializable(grid)
    header = {
        "magic": MAGIC,
        "version": VERSION,
        "nx": grid.nx,
        "ny": grid.ny,
        "x0": grid.x0,
        "y0": grid.y0,
        "h": grid.h,
        "mask": grid.mask_kind,
        "components": len(arrays),
    }
    with open(path, "w") as f:
        json.dump(header, f, sort_keys=True, indent=2)
        f.write("\n")
    # (nx, ny) arrays -> row-major over (iy, ix), components interleaved
    stacked = np.stack([a.T for a in arrays], axis=-1)
    with open(_binary_path(path), "wb") as f:
        f.write(np.ascontiguousarray(stacked, dtype="<f8").tobytes())


def _read(path):
    with open(path) as f:
        hdr = json.load(f)
    if hdr.get("magic") != MAGIC or hdr.get("version") != VERSION:
        raise DataError(f"{path}: not a VF2D v{VERSION} header")
    grid = _grid_from_header(hdr)
    ncomp = hdr["components"]
    binpath = _binary_path(path)
    expected = grid.nx * grid.ny * ncomp * 8
    if not os.path.exists(binpath):
        raise DataError(f"missing VF2D binary file {binpath}")
    raw = open(binpath, "rb").read()
    if len(raw) != expected:
        raise DataError(f"{binpath}: expected {expected} bytes, got {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8").reshape(grid.ny, grid.nx, ncomp)
    arrays = [np.ascontiguousarray(data[:, :, k].T) for k in range(ncomp)]
    return grid, arrays


def write_vector_field(path, V):
    _write(path, V.grid, [V.vx, V.vy])


def read_vector_field(path):
    grid, arrays = _read(path)
    if len(arrays) != 2:
        raise DataError(f"{path}: expected 2 components, got {len(arrays)}")
    return VectorField2D(grid, arrays[0], arrays[1])


def write_circle_field(path, u):
    _write(path, u.grid, [u.theta])


def read_circle_field(path):
    grid, arrays = _read(path)
    if len(arrays) != 1:
        raise DataError(f"{path}: expected 1 component, got {len(arrays)}")
    return CircleValuedField(grid, arrays[0])
