"""Intrinsic volumes of cubical sets.

A cubical set on a regular grid is stored as one boolean array per cell
*type*. A type is the tuple of axes a cell spans: ``()`` for vertices,
``(0,)`` and ``(1,)`` for edges in 2D, ``(0, 1)`` for squares, and so on.
An array for type ``S`` has extent ``dims[a] - 1`` along the axes in ``S``
and ``dims[a]`` along the others.

Each present cell is read as a *relatively open* cube, so the set is the
disjoint union of its cells and every intrinsic volume is a sum of per-cell
weights. This makes the valuation exact for the cubical set itself and lets
non-closed sets such as half-open boxes be represented.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, Tuple

import numpy as np

CellType = Tuple[int, ...]


@dataclass(frozen=True)
class GridSpec:
    """Vertex extents per axis and the (isotropic) spacing h."""

    dims: Tuple[int, ...]
    spacing: float = 1.0

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", float(self.spacing))
        if not 1 <= len(dims) <= 3:
            raise ValueError(f"only 1, 2 or 3 dimensional grids are supported, got {len(dims)}")
        if any(d < 2 for d in dims):
            raise ValueError(f"every axis needs at least 2 vertices, got dims={dims}")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError(f"spacing must be positive, got {self.spacing}")

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def side_lengths(self) -> Tuple[float, ...]:
        return tuple((d - 1) * self.spacing for d in self.dims)

    def cell_types(self) -> Iterator[CellType]:
        for m in range(self.ndim + 1):
            yield from itertools.combinations(range(self.ndim), m)

    def cell_shape(self, ctype: CellType) -> Tuple[int, ...]:
        return tuple(d - 1 if a in ctype else d for a, d in enumerate(self.dims))


def cell_weight(m: int, k: int, h: float) -> float:
    """mu_k of a relatively open m-cube of side h: (-1)^(m-k) C(m, k) h^k."""
    if k > m:
        return 0.0
    return (-1) ** (m - k) * math.comb(m, k) * h**k


def _shrink(arr: np.ndarray, axis: int, op) -> np.ndarray:
    lo = [slice(None)] * arr.ndim
    hi = [slice(None)] * arr.ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return op(arr[tuple(lo)], arr[tuple(hi)])


def full_subcomplex(values: np.ndarray, ctype: CellType, op) -> np.ndarray:
    """Reduce vertex data onto cells of one type by folding ``op`` over cell corners."""
    out = values
    for a in ctype:
        out = _shrink(out, a, op)
    return out


@dataclass(frozen=True)
class CubicalSet:
    """Presence flags for every cell of every dimension on a grid."""

    grid: GridSpec
    cells: Dict[CellType, np.ndarray] = field(repr=False)
    closed: bool = False

    def __post_init__(self):
        cells = {}
        for ctype in self.grid.cell_types():
            arr = self.cells.get(ctype)
            shape = self.grid.cell_shape(ctype)
            if arr is None:
                arr = np.zeros(shape, dtype=bool)
            arr = np.asarray(arr, dtype=bool)
            if arr.shape != shape:
                raise ValueError(f"cell type {ctype}: expected shape {shape}, got {arr.shape}")
            arr = arr.copy()
            arr.flags.writeable = False
            cells[ctype] = arr
        unknown = set(self.cells) - set(cells)
        if unknown:
            raise ValueError(f"unknown cell types {sorted(unknown)}")
        object.__setattr__(self, "cells", cells)
        if self.closed and not self.is_closed():
            raise ValueError("set marked closed but a face of a present cell is missing")

    # construction

    @classmethod
    def empty(cls, grid: GridSpec) -> "CubicalSet":
        return cls(grid, {}, closed=True)

    @classmethod
    def from_vertex_mask(cls, grid: GridSpec, mask: np.ndarray) -> "CubicalSet":
        """Closed complex of all cells whose vertices are all in ``mask``."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != grid.dims:
            raise ValueError(f"vertex mask shape {mask.shape} does not match grid {grid.dims}")
        cells = {t: full_subcomplex(mask, t, np.logical_and) for t in grid.cell_types()}
        return cls(grid, cells, closed=True)

    @classmethod
    def from_pixel_mask(cls, mask: np.ndarray, spacing: float = 1.0) -> "CubicalSet":
        """Closed union of the top-dimensional cells flagged in ``mask``.

        ``mask`` has one entry per pixel (voxel); the grid gets one more
        vertex than pixels along each axis.
        """
        mask = np.asarray(mask, dtype=bool)
        grid = GridSpec(tuple(s + 1 for s in mask.shape), spacing)
        return cls.closure(grid, {tuple(range(grid.ndim)): mask})

    @classmethod
    def closure(cls, grid: GridSpec, cells: Dict[CellType, np.ndarray]) -> "CubicalSet":
        """Smallest closed complex containing the given cells."""
        full = {t: np.zeros(grid.cell_shape(t), dtype=bool) for t in grid.cell_types()}
        for t, arr in cells.items():
            full[t] |= np.asarray(arr, dtype=bool)
        # push presence down from high to low dimension
        for m in range(grid.ndim, 0, -1):
            for t in itertools.combinations(range(grid.ndim), m):
                src = full[t]
                if not src.any():
                    continue
                for a in t:
                    face = tuple(b for b in t if b != a)
                    pad = [(0, 0)] * grid.ndim
                    pad[a] = (0, 1)
                    lower = np.pad(src, pad)
                    pad[a] = (1, 0)
                    upper = np.pad(src, pad)
                    full[face] |= lower | upper
        return cls(grid, full, closed=True)

    @classmethod
    def box(cls, grid: GridSpec, lo, hi) -> "CubicalSet":
        """Closed box spanning vertex indices lo..hi (inclusive) per axis."""
        mask = np.zeros(grid.dims, dtype=bool)
        mask[tuple(slice(a, b + 1) for a, b in zip(lo, hi))] = True
        return cls.from_vertex_mask(grid, mask)

    # queries

    def is_closed(self) -> bool:
        for t, arr in self.cells.items():
            for a in t:
                face = tuple(b for b in t if b != a)
                fa = self.cells[face]
                lo = [slice(None)] * self.grid.ndim
                hi = [slice(None)] * self.grid.ndim
                lo[a] = slice(None, -1)
                hi[a] = slice(1, None)
                if np.any(arr & ~fa[tuple(lo)]) or np.any(arr & ~fa[tuple(hi)]):
                    return False
        return True

    def counts(self) -> np.ndarray:
        """Number of present cells per cell dimension 0..n."""
        out = np.zeros(self.grid.ndim + 1, dtype=np.int64)
        for t, arr in self.cells.items():
            out[len(t)] += int(np.count_nonzero(arr))
        return out

    def is_empty(self) -> bool:
        return not any(arr.any() for arr in self.cells.values())

    def _combine(self, other: "CubicalSet", op) -> "CubicalSet":
        if other.grid != self.grid:
            raise ValueError("cubical sets live on different grids")
        cells = {t: op(self.cells[t], other.cells[t]) for t in self.cells}
        return CubicalSet(self.grid, cells, closed=False)

    def union(self, other: "CubicalSet") -> "CubicalSet":
        return self._combine(other, np.logical_or)

    def intersection(self, other: "CubicalSet") -> "CubicalSet":
        return self._combine(other, np.logical_and)

    def with_spacing(self, spacing: float) -> "CubicalSet":
        return CubicalSet(GridSpec(self.grid.dims, spacing), self.cells, self.closed)

    @property
    def pixel_mask(self) -> np.ndarray:
        return self.cells[tuple(range(self.grid.ndim))]


def intrinsic_volumes(cset: CubicalSet) -> np.ndarray:
    """Exact intrinsic volumes (mu_0, ..., mu_n) of a cubical set."""
    n = cset.grid.ndim
    h = cset.grid.spacing
    counts = cset.counts()
    weights = np.array([[cell_weight(m, k, h) for k in range(n + 1)] for m in range(n + 1)])
    return counts.astype(float) @ weights


def box_intrinsic_volumes(side_lengths) -> np.ndarray:
    """Intrinsic volumes of a closed axis-aligned box: elementary symmetric polynomials."""
    sides = [float(s) for s in side_lengths]
    if any(s < 0 for s in sides):
        raise ValueError("box sides must be nonnegative")
    # coefficients of prod (1 + a_i t)
    poly = np.array([1.0])
    for a in sides:
        poly = np.convolve(poly, [1.0, a])
    return poly


def excursion_complex(values: np.ndarray, grid: GridSpec, s: float, convention: str = "closed") -> CubicalSet:
    """Cubical model of {f >= s} (closed) or {f > s} (open) from vertex samples.

    A cell is present iff every one of its vertices passes the test.
    """
    values = np.asarray(values, dtype=float)
    if convention == "closed":
        mask = values >= s
    elif convention == "open":
        mask = values > s
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return CubicalSet.from_vertex_mask(grid, mask)


# Corner-segment weight. The plain midpoint contour uses sqrt(1/2) here and
# overestimates the length of digitised straight lines by 8(sqrt2 - 1)/pi
# on average over orientations; this weight keeps axis-aligned edges exact
# and makes the orientation average unbiased.
CORNER_WEIGHT = 0.5 * (1.0 + (math.pi / 4 - math.sqrt(0.5)) / (1.0 - math.sqrt(0.5)))


def polygonized_mu1(cset: CubicalSet) -> float:
    """Half the boundary length of the pixel mask, measured on its midpoint contour.

    The contour joins midpoints between pixel centres (marching squares
    without interpolation), so staircase corners are cut instead of being
    counted at full length. Straight runs count one spacing per window and
    corner cuts count ``CORNER_WEIGHT`` spacings.
    """
    if cset.grid.ndim != 2:
        raise ValueError("polygonized_mu1 is defined for 2D sets only")
    p = np.pad(cset.pixel_mask, 1).astype(np.int8)
    a, b = p[:-1, :-1], p[:-1, 1:]
    c, d = p[1:, :-1], p[1:, 1:]
    n = a + b + c + d
    diagonal = (n == 2) & (a == d)
    corners = np.count_nonzero((n == 1) | (n == 3)) + 2 * np.count_nonzero(diagonal)
    straight = np.count_nonzero((n == 2) & ~diagonal)
    return 0.5 * (straight + CORNER_WEIGHT * corners) * cset.grid.spacing


def half_open_cube(grid: GridSpec, j: int) -> CubicalSet:
    """[0, h)^j x {0}: the cells of the first j-cube that contain the origin.

    Its intrinsic volumes are h^j in slot j and 0 elsewhere, which makes
    these sets the standard test bodies for isolating one mu_j.
    """
    if not 0 <= j <= grid.ndim:
        raise ValueError(f"j must lie in 0..{grid.ndim}")
    cells = {}
    for m in range(j + 1):
        for t in itertools.combinations(range(j), m):
            arr = np.zeros(grid.cell_shape(t), dtype=bool)
            arr[(0,) * grid.ndim] = True
            cells[t] = arr
    return CubicalSet(grid, cells, closed=(j == 0))
