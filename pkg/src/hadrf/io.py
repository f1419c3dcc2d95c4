"""File formats: GridFunction text files and PGM masks."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .cubical import CubicalSet, GridSpec
from .hadwiger import GridFunction


def read_grid_function(path) -> GridFunction:
    """Parse ``rows cols h`` (or ``nx ny nz h``, or ``n h``) then row-major values."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise ValueError(f"{path}: empty grid file")
    header = lines[0].split()
    if not 2 <= len(header) <= 4:
        raise ValueError(f"{path}:1: header must be 'dims... spacing', got {lines[0]!r}")
    try:
        dims = tuple(int(v) for v in header[:-1])
        spacing = float(header[-1])
    except ValueError as exc:
        raise ValueError(f"{path}:1: bad header: {exc}") from None
    values = np.array(" ".join(lines[1:]).split(), dtype=float)
    expected = int(np.prod(dims))
    if values.size != expected:
        raise ValueError(f"{path}: expected {expected} values for dims {dims}, found {values.size}")
    return GridFunction(GridSpec(dims, spacing), values.reshape(dims))


def write_grid_function(f: GridFunction, path) -> None:
    header = " ".join(str(d) for d in f.grid.dims) + f" {f.grid.spacing!r}"
    rows = f.values.reshape(-1, f.grid.dims[-1])
    body = "\n".join(" ".join(repr(float(v)) for v in row) for row in rows)
    Path(path).write_text(header + "\n" + body + "\n")


def read_pgm_mask(path, spacing: float = 1.0) -> CubicalSet:
    """Closed cubical set of the nonzero pixels of a P2/P5 PGM image."""
    with Image.open(path) as im:
        if im.format != "PPM" or im.mode not in ("L", "I", "I;16", "1"):
            raise ValueError(f"{path}: not a greyscale PGM image")
        mask = np.asarray(im) != 0
    return CubicalSet.from_pixel_mask(mask, spacing)
