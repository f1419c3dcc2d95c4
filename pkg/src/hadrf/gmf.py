"""Gaussian Minkowski functionals of superlevel sets {F >= s}.

Two families are available in closed form:

* real case, F: R -> R continuous and piecewise C^2. {F >= s} is a union of
  closed intervals [a_i, b_i] and, for j >= 1,
  M_j = sum_i (-1)^(j-1) H_{j-1}(b_i) phi(b_i) + H_{j-1}(a_i) phi(a_i),
  infinite endpoints contributing nothing. M_0 is the Gaussian measure.
* chi-square case, F(x) = |x|^2 on R^k, where for j >= 1 and s > 0
  M_j = (-1)^(j-1) p_k^{(j-1)}(sqrt(s)) with p_k the chi density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import DegenerateLevelError, UnsupportedTransformError
from .piecewise import Piecewise1D
from .quadrature import adaptive_integrate
from .special import (
    GAUSS_CUTOFF,
    PolyGauss,
    chi_density,
    gamma_fn,
    gaussian_density,
    gaussian_tail,
    hermite,
    upper_regularized_gamma,
)

ROOT_GRID_STEP = 1e-4
BISECTION_STEPS = 40


@dataclass(frozen=True)
class IntervalUnion:
    """Disjoint closed intervals in increasing order; endpoints may be infinite."""

    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        for (a, b), nxt in zip(ivs, ivs[1:] + ((math.inf, math.inf),)):
            if not a <= b or (nxt[0] != math.inf and not b < nxt[0]):
                raise ValueError(f"intervals must be ordered and disjoint: {ivs}")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def everything(cls) -> "IntervalUnion":
        return cls(((-math.inf, math.inf),))


class _Crossings:
    """Monotone decomposition of F sampled on a fine grid over [-38, 38]."""

    def __init__(self, F: Piecewise1D):
        n = int(round(2 * GAUSS_CUTOFF / ROOT_GRID_STEP)) + 1
        self.F = F
        self.x = np.linspace(-GAUSS_CUTOFF, GAUSS_CUTOFF, n)
        self.y = np.asarray(F(self.x), dtype=float)
        d = np.sign(np.diff(self.y))
        self.flat_steps = np.flatnonzero(d == 0)
        self.flat_levels = np.unique(self.y[self.flat_steps])
        moving = np.flatnonzero(d != 0)
        segments = []
        if len(moving):
            # split runs of same direction (flat steps also break a run)
            cut = np.flatnonzero((np.diff(moving) != 1) | (np.diff(d[moving]) != 0)) + 1
            for run in np.split(moving, cut):
                p, q = int(run[0]), int(run[-1]) + 1
                segments.append((p, q, int(d[run[0]])))
        self.segments = segments
        ext = sorted({p for p, _, _ in segments} | {q for _, q, _ in segments})
        self.critical_values = np.unique(self.y[ext]) if ext else np.zeros(0)

    def find(self, s: np.ndarray):
        """Crossings of F = s: arrays (which s, root x, +1 upward / -1 downward)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if len(self.flat_levels):
            hit = np.isin(s, self.flat_levels)
            if hit.any():
                raise DegenerateLevelError(
                    f"F is constant at level s = {s[hit][0]:.6g} on an interval (degenerate level)"
                )
        owners, steps, kinds = [], [], []
        y = self.y
        for p, q, direction in self.segments:
            seg = y[p : q + 1]
            if direction > 0:
                t = p + np.searchsorted(seg, s, side="left")
            else:
                t = p + np.searchsorted(-seg, -s, side="right")
            ok = (t > p) & (t <= q)
            idx = np.flatnonzero(ok)
            owners.append(idx)
            steps.append(t[ok])
            kinds.append(np.full(len(idx), direction))
        owner = np.concatenate(owners) if owners else np.zeros(0, dtype=int)
        step = np.concatenate(steps) if steps else np.zeros(0, dtype=int)
        kind = np.concatenate(kinds) if kinds else np.zeros(0, dtype=int)
        level = s[owner]
        # bracket with F(below) < s <= F(above)
        above = np.where(kind > 0, self.x[step], self.x[step - 1])
        below = np.where(kind > 0, self.x[step - 1], self.x[step])
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (above + below)
            up = self.F(mid) >= level
            above = np.where(up, mid, above)
            below = np.where(up, below, mid)
        return owner, 0.5 * (above + below), kind

    def starts_inside(self, s: np.ndarray) -> np.ndarray:
        return self.y[0] >= np.atleast_1d(s)


def _crossings(F: Piecewise1D) -> _Crossings:
    cached = getattr(F, "_hadrf_crossings", None)
    if cached is None:
        cached = _Crossings(F)
        F._hadrf_crossings = cached
    return cached


def superlevel_intervals(F: Piecewise1D, s: float) -> IntervalUnion:
    """{F >= s} as closed intervals, clipped to [-38, 38] (beyond is +-inf)."""
    cr = _crossings(F)
    _, roots, kinds = cr.find(np.array([s]))
    order = np.argsort(roots)
    intervals: List[Tuple[float, float]] = []
    start = -math.inf if cr.starts_inside(s)[0] else None
    for x, kind in zip(roots[order], kinds[order]):
        if kind > 0:
            start = float(x)
        else:
            intervals.append((start, float(x)))
            start = None
    if start is not None:
        intervals.append((start, math.inf))
    return IntervalUnion(tuple(intervals))


def gmf_real(j: int, intervals: IntervalUnion) -> float:
    """M_j of a union of intervals in the real line."""
    if j < 0:
        raise ValueError("j must be >= 0")
    total = 0.0
    for a, b in intervals.intervals:
        if j == 0:
            total += float(gaussian_tail(a)) - float(gaussian_tail(b))
            continue
        if math.isfinite(a):
            total += float(hermite(j - 1, a) * gaussian_density(a))
        if math.isfinite(b):
            total += (-1) ** (j - 1) * float(hermite(j - 1, b) * gaussian_density(b))
    return total


def gmf_real_levels(j: int, F: Piecewise1D, s) -> np.ndarray:
    """Vectorized M_j{F >= s} over an array of levels (real case)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    cr = _crossings(F)
    owner, x, kind = cr.find(s)
    if j == 0:
        contrib = np.where(kind > 0, 1.0, -1.0) * gaussian_tail(x)
        base = cr.starts_inside(s).astype(float)
    else:
        sign = np.where(kind > 0, 1.0, float((-1) ** (j - 1)))
        contrib = sign * hermite(j - 1, x) * gaussian_density(x)
        base = np.zeros(len(s))
    return base + np.bincount(owner, weights=contrib, minlength=len(s))


def _chi_derivative(j: int, k: int) -> PolyGauss:
    p = chi_density(k)
    for _ in range(j - 1):
        p = p.derivative()
    return p


def gmf_chi2(j: int, s, k: int):
    """M_j{|x|^2 >= s} in R^k."""
    if j < 0 or k < 1:
        raise ValueError("need j >= 0 and k >= 1")
    s_arr = np.asarray(s, dtype=float)
    pos = s_arr > 0
    safe = np.where(pos, s_arr, 1.0)
    if j == 0:
        out = np.where(pos, upper_regularized_gamma(k / 2.0, safe / 2.0), 1.0)
    else:
        deriv = _chi_derivative(j, k)
        out = np.where(pos, (-1) ** (j - 1) * deriv(np.sqrt(safe)), 0.0)
    return out[()] if out.ndim == 0 else out


def gmf_identity(j: int, s):
    """M_j{x >= s} = H_{j-1}(s) phi(s) for j >= 1, Psi(s) for j = 0."""
    if j == 0:
        return gaussian_tail(s)
    return hermite(j - 1, s) * gaussian_density(s)


def gmf_superlevel(j: int, transform, k: int, s):
    """M_j{F >= s} for a TransformSpec and component count k."""
    transform.check_arity(k)
    if transform.kind == "identity":
        return gmf_identity(j, s)
    if transform.kind == "chi2":
        return gmf_chi2(j, s, k)
    return gmf_real_levels(j, transform.function, s)


def chi2_level_cap(k: int) -> float:
    return (math.sqrt(k) + 8.0) ** 2


def gmf_integral(transform, j: int, k: int = 1, rtol: float = 1e-8) -> float:
    """int_R M_j{F >= s} ds by adaptive Gauss-Legendre quadrature."""
    if j < 1:
        raise ValueError("gmf_integral is defined for j >= 1")
    transform.check_arity(k)
    if transform.kind == "identity":
        bp = np.concatenate([[-GAUSS_CUTOFF], np.arange(-12.0, 12.5, 0.5), [GAUSS_CUTOFF]])
        return adaptive_integrate(lambda s: gmf_identity(j, s), bp, rtol=rtol)
    if transform.kind == "chi2":
        root_cap = math.sqrt(chi2_level_cap(k))
        bp = np.append(np.arange(0.0, root_cap, 0.25), root_cap) ** 2
        return adaptive_integrate(lambda s: gmf_chi2(j, s, k), bp, rtol=rtol)
    F = transform.function
    cr = _crossings(F)
    coarse = np.arange(-12.0, 12.0 + 1e-9, 0.125)
    bp = np.concatenate(
        [[cr.y.min(), cr.y.max()], cr.critical_values, F(coarse), F(F.breakpoints) if len(F.breakpoints) else []]
    )
    return adaptive_integrate(lambda s: gmf_real_levels(j, F, s), bp, rtol=rtol)


def chi2_gmf_integral_closed_form(j: int, k: int) -> float:
    """Closed forms of int_0^inf M_j{|x|^2 >= s} ds; valid for j <= k + 1."""
    if j == 1:
        return 2.0 * math.sqrt(2.0) * gamma_fn((k + 1) / 2.0) / gamma_fn(k / 2.0)
    if j == 2:
        return 2.0
    if 3 <= j <= k + 1:
        return 0.0
    raise UnsupportedTransformError(f"no closed form for j = {j}, k = {k}")
