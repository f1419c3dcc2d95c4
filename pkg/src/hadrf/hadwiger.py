"""Lower and upper Hadwiger integrals of functions sampled on grids.

Superlevel sets are modelled cell by cell: a relatively open cell belongs to
{f >= s} iff its *level* (the minimum of f over its vertices) is >= s, and to
{f > s} iff the level is > s. Integrals are then level sweeps over sorted
cell levels, with sublevel terms obtained by complement,
mu_i{f < s} = mu_i(M) - mu_i{f >= s}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .cubical import CellType, CubicalSet, GridSpec, cell_weight, excursion_complex, full_subcomplex, intrinsic_volumes
from .piecewise import Piecewise1D

DEFAULT_LEVELS = 400


@dataclass(frozen=True)
class GridFunction:
    """Real values at every vertex of a grid (array shape == grid.dims)."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.dims:
            if vals.size != int(np.prod(self.grid.dims)):
                raise ValueError(f"expected {np.prod(self.grid.dims)} values, got {vals.size}")
            vals = vals.reshape(self.grid.dims)
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", vals)

    def map(self, fn) -> "GridFunction":
        return GridFunction(self.grid, fn(self.values))

    def cell_levels(self) -> "CellFunction":
        levels = {t: full_subcomplex(self.values, t, np.minimum) for t in self.grid.cell_types()}
        return CellFunction(self.grid, levels)


@dataclass(frozen=True)
class CellFunction:
    """A function constant on each relatively open cell of a grid."""

    grid: GridSpec
    levels: Dict[CellType, np.ndarray] = field(repr=False)

    @classmethod
    def indicator(cls, cset: CubicalSet, r: float = 1.0) -> "CellFunction":
        """r on the cells of ``cset`` and 0 elsewhere."""
        return cls(cset.grid, {t: np.where(a, float(r), 0.0) for t, a in cset.cells.items()})

    def map(self, fn) -> "CellFunction":
        return CellFunction(self.grid, {t: np.asarray(fn(v), dtype=float) for t, v in self.levels.items()})

    def value_range(self) -> Tuple[float, float]:
        lo = min(float(v.min()) for v in self.levels.values())
        hi = max(float(v.max()) for v in self.levels.values())
        return lo, hi


FunctionLike = Union[GridFunction, CellFunction]


@dataclass(frozen=True)
class SweepSettings:
    """Level step for the ds integral and an optional explicit level range."""

    level_step: Optional[float] = None
    bounds: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.level_step is not None and not self.level_step > 0:
            raise ValueError("level_step must be positive")
        if self.bounds is not None and not self.bounds[0] < self.bounds[1]:
            raise ValueError("sweep bounds must satisfy lo < hi")


class LevelProfile:
    """mu_i of the superlevel sets of a cell function, for any threshold."""

    def __init__(self, f: FunctionLike, i: int):
        cf = f.cell_levels() if isinstance(f, GridFunction) else f
        n = cf.grid.ndim
        if not 0 <= i <= n:
            raise ValueError(f"index i must lie in 0..{n}, got {i}")
        h = cf.grid.spacing
        levels, weights = [], []
        for t, arr in cf.levels.items():
            w = cell_weight(len(t), i, h)
            if w != 0.0:
                levels.append(arr.ravel())
                weights.append(np.full(arr.size, w))
        if levels:
            lv = np.concatenate(levels)
            wt = np.concatenate(weights)
            order = np.argsort(lv, kind="stable")
            self.levels = lv[order]
            self.cumulative = np.concatenate([[0.0], np.cumsum(wt[order])])
        else:
            self.levels = np.zeros(0)
            self.cumulative = np.zeros(1)
        self.total = float(self.cumulative[-1])
        self.range = cf.value_range()

    def superlevel(self, s, strict: bool = False):
        """mu_i{f >= s}, or mu_i{f > s} when ``strict``."""
        side = "right" if strict else "left"
        idx = np.searchsorted(self.levels, s, side=side)
        return self.total - self.cumulative[idx]


def _sweep_levels(lo: float, hi: float, step: float) -> np.ndarray:
    # Lattice anchored at 0 so that s = 0 and, when 1/step is an integer,
    # every integer level falls on a cell boundary.
    k0 = math.floor(lo / step)
    k1 = math.ceil(hi / step)
    return (np.arange(k0, k1) + 0.5) * step


def _default_step(lo: float, hi: float) -> float:
    if hi > lo:
        return (hi - lo) / DEFAULT_LEVELS
    scale = max(abs(lo), abs(hi))
    return scale / DEFAULT_LEVELS if scale > 0 else 1.0


def _integral(f: FunctionLike, i: int, sweep: Optional[SweepSettings], strict: bool) -> float:
    sweep = sweep or SweepSettings()
    prof = LevelProfile(f, i)
    fmin, fmax = prof.range
    step = sweep.level_step or _default_step(fmin, fmax)
    if sweep.bounds is not None:
        lo, hi = sweep.bounds
    else:
        lo, hi = min(fmin - step, 0.0), max(fmax, 0.0)
    s = _sweep_levels(lo, hi, step)
    vals = prof.superlevel(s, strict=strict)
    vals = np.where(s < 0, vals - prof.total, vals)
    return float(np.sum(vals) * step)


def lower_integral(f: FunctionLike, i: int, sweep: Optional[SweepSettings] = None) -> float:
    """int_0^inf (mu_i{f >= s} - mu_i{f < -s}) ds by a midpoint level sweep."""
    return _integral(f, i, sweep, strict=False)


def upper_integral(f: FunctionLike, i: int, sweep: Optional[SweepSettings] = None) -> float:
    """int_0^inf (mu_i{f > s} - mu_i{f <= -s}) ds by a midpoint level sweep."""
    return _integral(f, i, sweep, strict=True)


def exact_lower_integral(f: FunctionLike, i: int) -> float:
    """Closed form of the sweep as the step tends to 0: sum of weight * level over cells."""
    cf = f.cell_levels() if isinstance(f, GridFunction) else f
    h = cf.grid.spacing
    return float(sum(cell_weight(len(t), i, h) * arr.sum() for t, arr in cf.levels.items()))


def finite_image_integral(f: GridFunction, i: int) -> float:
    """sum_{s=1}^{max f} mu_i{f >= s} for a nonnegative integer-valued f."""
    vals = f.values
    if np.any(vals < 0) or np.any(vals != np.round(vals)):
        raise ValueError("finite_image_integral needs nonnegative integer values")
    if not 0 <= i <= f.grid.ndim:
        raise ValueError(f"index i must lie in 0..{f.grid.ndim}, got {i}")
    total = 0.0
    for s in range(1, int(vals.max()) + 1):
        total += intrinsic_volumes(excursion_complex(vals, f.grid, s, "closed"))[i]
    return total


@dataclass(frozen=True)
class ValuationSpec:
    """Valuation v(f) = sum_i int c_i(f) d mu_i with c_i(0) = 0."""

    c: Sequence[Piecewise1D]
    continuity: str = "lower"

    def __post_init__(self):
        if self.continuity not in ("lower", "upper"):
            raise ValueError("continuity must be 'lower' or 'upper'")
        for idx, ci in enumerate(self.c):
            c0 = float(ci(0.0))
            if abs(c0) > 1e-12:
                raise ValueError(f"c_{idx}(0) must be 0, got {c0}")
        object.__setattr__(self, "c", tuple(self.c))

    @classmethod
    def single(cls, n: int, j: int, cj: Piecewise1D, continuity: str = "lower") -> "ValuationSpec":
        zero = Piecewise1D.polynomial([0.0])
        return cls([cj if i == j else zero for i in range(n + 1)], continuity)


def valuation_eval(v: ValuationSpec, f: FunctionLike, sweep: Optional[SweepSettings] = None) -> float:
    """sum_i of the lower (or upper) Hadwiger integral of c_i composed with f."""
    n = f.grid.ndim
    if len(v.c) != n + 1:
        raise ValueError(f"valuation needs {n + 1} functions c_i for a {n}D domain, got {len(v.c)}")
    integral = lower_integral if v.continuity == "lower" else upper_integral
    total = 0.0
    for i, ci in enumerate(v.c):
        total += integral(f.map(ci), i, sweep)
    return total
