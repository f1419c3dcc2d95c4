"""Stationary isotropic Gaussian random fields on grids and pointwise transforms."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

from .cubical import GridSpec
from .errors import EmbeddingError, QuadratureError, UnsupportedTransformError
from .hadwiger import GridFunction
from .piecewise import Piecewise1D
from .quadrature import adaptive_integrate
from .special import GAUSS_CUTOFF, SQRT_2PI, gaussian_density

MARGIN_LENGTH_SCALES = 6.0


@dataclass(frozen=True)
class CovarianceModel:
    """Squared-exponential covariance C(r) = exp(-r^2 / (2 l^2))."""

    length_scale: float
    kind: str = "squared_exponential"

    def __post_init__(self):
        if self.kind != "squared_exponential":
            raise ValueError(f"unsupported covariance kind {self.kind!r}")
        if not self.length_scale > 0:
            raise ValueError("length_scale must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-0.5 * (r / self.length_scale) ** 2)


def second_spectral_moment(cov: CovarianceModel) -> float:
    """lambda_2 = -C''(0), the variance of a unit directional derivative."""
    return 1.0 / cov.length_scale**2


def _pow2_at_least(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def _spectrum_1d(n: int, spacing: float, length_scale: float) -> np.ndarray:
    idx = np.arange(n)
    lag = np.minimum(idx, n - idx) * spacing
    return sfft.fft(CovarianceModel(length_scale)(lag)).real


def _auto_torus_axis(minimal: int, spacing: float, cov: CovarianceModel, max_doublings: int = 16) -> int:
    n = _pow2_at_least(minimal)
    for _ in range(max_doublings):
        lam = _spectrum_1d(n, spacing, cov.length_scale)
        if lam.min() >= -1e-10 * lam.max():
            break
        n *= 2
    return n


@dataclass(frozen=True)
class FieldSpec:
    """k i.i.d. unit-variance field components on ``grid``.

    ``torus`` is the periodic simulation box in vertices; by default the
    smallest power of two per axis that leaves a margin of six length scales
    and whose circulant embedding is nonnegative (small tori around long
    correlations are doubled until it is).
    """

    grid: GridSpec
    cov: CovarianceModel
    components: int = 1
    seed: int = 0
    torus: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.components < 1:
            raise ValueError("components must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        minimal = self.minimal_torus()
        if self.torus is None:
            object.__setattr__(self, "torus", tuple(_auto_torus_axis(m, self.grid.spacing, self.cov) for m in minimal))
        else:
            torus = tuple(int(t) for t in self.torus)
            if len(torus) != self.grid.ndim or any(t < m for t, m in zip(torus, minimal)):
                raise ValueError(f"torus {torus} is smaller than the required {minimal}")
            object.__setattr__(self, "torus", torus)
        if self.grid.spacing > self.cov.length_scale / 5:
            warnings.warn(
                f"grid spacing {self.grid.spacing:g} exceeds length_scale/5; "
                "excursion geometry will be poorly resolved",
                stacklevel=3,
            )

    def minimal_torus(self) -> Tuple[int, ...]:
        margin = math.ceil(MARGIN_LENGTH_SCALES * self.cov.length_scale / self.grid.spacing - 1e-9)
        return tuple(d + margin for d in self.grid.dims)


@lru_cache(maxsize=16)
def _sqrt_spectrum(torus: Tuple[int, ...], spacing: float, length_scale: float) -> np.ndarray:
    # Squared-exponential covariance is separable, so the circulant
    # eigenvalues are an outer product of 1D spectra.
    spectrum = np.ones((1,) * len(torus))
    for axis, n in enumerate(torus):
        lam = _spectrum_1d(n, spacing, length_scale)
        shape = [1] * len(torus)
        shape[axis] = n
        spectrum = spectrum * lam.reshape(shape)
    smax = spectrum.max()
    if spectrum.min() < -1e-10 * smax:
        raise EmbeddingError(
            f"circulant embedding has negative eigenvalue {spectrum.min():.3g} "
            f"(max {smax:.3g}); enlarge the simulation torus"
        )
    return np.sqrt(np.clip(spectrum, 0.0, None))


def component_rng(seed: int, sample_index: int, component: int) -> np.random.Generator:
    """Counter-based stream for one (sample, component) pair."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(sample_index), int(component)))
    return np.random.Generator(np.random.Philox(ss))


def simulate(spec: FieldSpec, sample_index: int) -> List[GridFunction]:
    """Draw the ``sample_index``-th realization: one GridFunction per component.

    White noise on the torus is filtered by the square root of the circulant
    covariance and the target grid is cropped from the corner.
    """
    root = _sqrt_spectrum(spec.torus, spec.grid.spacing, spec.cov.length_scale)
    root = root[..., : spec.torus[-1] // 2 + 1]
    crop = tuple(slice(0, d) for d in spec.grid.dims)
    out = []
    for comp in range(spec.components):
        noise = component_rng(spec.seed, sample_index, comp).standard_normal(spec.torus)
        field = sfft.irfftn(root * sfft.rfftn(noise), s=spec.torus)
        out.append(GridFunction(spec.grid, np.ascontiguousarray(field[crop])))
    return out


@dataclass(frozen=True)
class TransformSpec:
    """F: R^k -> R defining the Gaussian-related field g = F(f)."""

    kind: str = "identity"
    function: Optional[Piecewise1D] = None

    def __post_init__(self):
        if self.kind not in ("identity", "chi2", "piecewise1d"):
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind == "piecewise1d" and self.function is None:
            raise ValueError("piecewise1d transform needs a function")

    @classmethod
    def identity(cls) -> "TransformSpec":
        return cls("identity")

    @classmethod
    def chi2(cls) -> "TransformSpec":
        return cls("chi2")

    @classmethod
    def piecewise(cls, fn: Piecewise1D) -> "TransformSpec":
        return cls("piecewise1d", fn)

    def check_arity(self, k: int) -> None:
        if self.kind in ("identity", "piecewise1d") and k != 1:
            raise UnsupportedTransformError(f"{self.kind} transform needs k = 1, got k = {k}")

    def as_piecewise(self) -> Piecewise1D:
        """The scalar function F for k = 1 transforms (chi2 with k = 1 is x^2)."""
        if self.kind == "identity":
            return Piecewise1D.polynomial([0.0, 1.0])
        if self.kind == "chi2":
            return Piecewise1D.polynomial([0.0, 0.0, 1.0])
        return self.function

    def to_json(self) -> dict:
        if self.kind == "piecewise1d":
            return self.function.to_json()
        return {"kind": self.kind}

    @classmethod
    def from_json(cls, obj: dict) -> "TransformSpec":
        kind = obj.get("kind")
        if kind == "piecewise1d":
            return cls.piecewise(Piecewise1D.from_polynomials(obj.get("breakpoints", []), obj["pieces"]))
        return cls(kind)


def apply_transform(F: TransformSpec, fields: Sequence[GridFunction]) -> GridFunction:
    """Vertexwise g = F(f_1, ..., f_k)."""
    F.check_arity(len(fields))
    grid = fields[0].grid
    if F.kind == "identity":
        return fields[0]
    if F.kind == "chi2":
        return GridFunction(grid, sum(f.values**2 for f in fields))
    return fields[0].map(F.function)


def _gauss_hermite_mean(fn, start: int = 64, max_nodes: int = 1024, tol: float = 1e-8) -> float:
    n = start
    prev = None
    while n <= max_nodes:
        with np.errstate(divide="ignore"):
            # the outermost weights underflow to 0 for large n, which is harmless
            x, w = np.polynomial.hermite_e.hermegauss(n)
        val = float(np.dot(w, fn(x)) / SQRT_2PI)
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        prev = val
        n *= 2
    raise QuadratureError("E[F(X)] did not converge under Gauss-Hermite node doubling")


def transform_mean(F: TransformSpec, k: int = 1) -> float:
    """E[F(X)] for X standard normal in R^k."""
    F.check_arity(k)
    if F.kind == "identity":
        return 0.0
    if F.kind == "chi2":
        return float(k)
    fn = F.function
    if len(fn.breakpoints) == 0:
        return _gauss_hermite_mean(fn)
    # kinks spoil Gauss-Hermite convergence; integrate piece by piece instead
    inner = fn.breakpoints[np.abs(fn.breakpoints) < GAUSS_CUTOFF]
    bp = np.concatenate([[-GAUSS_CUTOFF], inner, np.arange(-12.0, 12.5, 1.0), [GAUSS_CUTOFF]])
    return adaptive_integrate(lambda x: fn(x) * gaussian_density(x), bp)
