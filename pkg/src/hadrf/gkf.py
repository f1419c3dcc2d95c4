"""Expected intrinsic volumes, Hadwiger integrals and valuations of Gaussian-related fields.

All intrinsic volumes of the domain M enter in the metric induced by the
field. For an isotropic field with second spectral moment lambda_2 that
metric is Euclidean scaled by sqrt(lambda_2), so mu_j(M) picks up a factor
lambda_2^(j/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cubical import box_intrinsic_volumes
from .errors import UnsupportedTransformError
from .fields import TransformSpec, transform_mean
from .gmf import (
    chi2_gmf_integral_closed_form,
    chi2_level_cap,
    gmf_chi2,
    gmf_integral,
    gmf_superlevel,
)
from .hadwiger import ValuationSpec
from .piecewise import Piecewise1D
from .quadrature import adaptive_integrate
from .special import flag_coefficient, gamma_fn


@dataclass(frozen=True)
class DomainSummary:
    """Euclidean intrinsic volumes of M and the field's second spectral moment."""

    ivs: np.ndarray
    lambda2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "ivs", np.asarray(self.ivs, dtype=float))
        if not self.lambda2 > 0:
            raise ValueError("lambda2 must be positive")

    @classmethod
    def box(cls, side_lengths: Sequence[float], lambda2: float = 1.0) -> "DomainSummary":
        return cls(box_intrinsic_volumes(side_lengths), lambda2)

    @property
    def ndim(self) -> int:
        return len(self.ivs) - 1


def metric_scale(d: DomainSummary) -> np.ndarray:
    """Intrinsic volumes of M in the field-induced metric."""
    j = np.arange(len(d.ivs))
    return d.ivs * d.lambda2 ** (j / 2.0)


def _check_index(i: int, d: DomainSummary) -> None:
    if not 0 <= i <= d.ndim:
        raise ValueError(f"index i must lie in 0..{d.ndim}, got {i}")


def expected_intrinsic_volume(i: int, d: DomainSummary, F: TransformSpec, k: int, s) -> float:
    """E mu_i{g >= s} as a finite sum over j of flag * (2 pi)^(-j/2) * mu_{i+j}(M) * M_j{F >= s}."""
    _check_index(i, d)
    F.check_arity(k)
    mu = metric_scale(d)
    s_arr = np.asarray(s, dtype=float)
    total = np.zeros_like(s_arr)
    for j in range(d.ndim - i + 1):
        coef = flag_coefficient(i + j, j) * (2 * math.pi) ** (-j / 2.0) * mu[i + j]
        if coef == 0.0:
            continue
        total = total + coef * gmf_superlevel(j, F, k, s_arr)
    return total[()] if total.ndim == 0 else total


def _level_integral(F: TransformSpec, j: int, k: int) -> float:
    if F.kind == "chi2":
        try:
            return chi2_gmf_integral_closed_form(j, k)
        except UnsupportedTransformError:
            pass
    return gmf_integral(F, j, k)


def expected_hadwiger(i: int, d: DomainSummary, F: TransformSpec, k: int = 1, kind: str = "lower") -> float:
    """E of the lower (or upper) Hadwiger integral of g = F(f) against mu_i.

    The two kinds have the same expectation; ``kind`` is accepted for
    symmetry with the empirical side and validated only.
    """
    if kind not in ("lower", "upper"):
        raise ValueError("kind must be 'lower' or 'upper'")
    _check_index(i, d)
    F.check_arity(k)
    mu = metric_scale(d)
    total = mu[i] * transform_mean(F, k)
    for j in range(1, d.ndim - i + 1):
        coef = flag_coefficient(i + j, j) * (2 * math.pi) ** (-j / 2.0) * mu[i + j]
        if coef == 0.0:
            continue
        total += coef * _level_integral(F, j, k)
    return float(total)


# valuations


def _is_nondecreasing(c: Piecewise1D, lo: float, hi: float) -> bool:
    x = np.linspace(lo, hi, 20001)
    y = c(x)
    return bool(np.all(np.diff(y) >= -1e-12 * max(1.0, float(np.abs(y).max()))))


def _chi2_density(t, k: int):
    t = np.asarray(t, dtype=float)
    pos = t > 0
    safe = np.where(pos, t, 1.0)
    log_pdf = (k / 2.0 - 1) * np.log(safe) - safe / 2.0 - (k / 2.0) * math.log(2.0) - math.log(gamma_fn(k / 2.0))
    return np.where(pos, np.exp(log_pdf), 0.0)


def _chi2_composite_hadwiger(i: int, d: DomainSummary, c: Piecewise1D, k: int) -> float:
    """Expected Hadwiger integral of c(g) for a chi-square field g and nondecreasing c."""
    cap = chi2_level_cap(k)
    if not _is_nondecreasing(c, 0.0, cap):
        raise UnsupportedTransformError("chi2 composites need c nondecreasing on [0, inf)")
    mu = metric_scale(d)
    t_bp = np.append(np.arange(0.0, math.sqrt(cap), 0.25), math.sqrt(cap)) ** 2
    t_bp = np.union1d(t_bp, c.breakpoints[(c.breakpoints > 0) & (c.breakpoints < cap)])
    mean = adaptive_integrate(lambda t: c(t) * _chi2_density(t, k), t_bp)
    total = mu[i] * mean
    s_hi = float(c(cap))
    if s_hi <= 0:
        return float(total)

    def inverse(s):
        # smallest t with c(t) >= s, by bisection on [0, cap]
        lo = np.zeros_like(s)
        hi = np.full_like(s, cap)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            up = c(mid) >= s
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
        return hi

    s_bp = np.unique(np.concatenate([[0.0, s_hi], c(t_bp)]))
    for j in range(1, d.ndim - i + 1):
        coef = flag_coefficient(i + j, j) * (2 * math.pi) ** (-j / 2.0) * mu[i + j]
        if coef == 0.0:
            continue
        total += coef * adaptive_integrate(lambda s: gmf_chi2(j, inverse(s), k), s_bp)
    return float(total)


def expected_valuation(v: ValuationSpec, d: DomainSummary, F: TransformSpec, k: int = 1) -> float:
    """E v(g) = sum_i E int c_i(g) d mu_i for an isotropic field."""
    n = d.ndim
    if len(v.c) != n + 1:
        raise ValueError(f"valuation needs {n + 1} functions c_i, got {len(v.c)}")
    F.check_arity(k)
    total = 0.0
    for i, ci in enumerate(v.c):
        if ci.coeffs is not None and not any(any(p) for p in ci.coeffs):
            continue
        if F.kind == "chi2":
            total += _chi2_composite_hadwiger(i, d, ci, k)
            continue
        inner = F.as_piecewise()
        composite = ci if F.kind == "identity" else ci.compose(inner)
        total += expected_hadwiger(i, d, TransformSpec.piecewise(composite), 1, v.continuity)
    return total
