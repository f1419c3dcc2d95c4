"""Scalar special-function kernel.

Hermite polynomials here use the probabilists' convention,
``H_m(x) = (-1)^m phi(x)^{-1} d^m/dx^m phi(x)``, so ``H_2(x) = x^2 - 1``.
The physicists' polynomials differ by the scaling ``x -> x / sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

SQRT_2PI = math.sqrt(2.0 * math.pi)
# phi(38) ~ 1e-314; beyond this everything is below double precision
GAUSS_CUTOFF = 38.0


def gaussian_density(x):
    """Standard normal density phi(x); accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / SQRT_2PI
    return out[()] if out.ndim == 0 else out


def gaussian_tail(x):
    """Upper tail Psi(x) = P(X >= x) for a standard normal X."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * _sp.erfc(x / math.sqrt(2.0))
    return out[()] if out.ndim == 0 else out


def hermite(m: int, x):
    """Probabilists' Hermite polynomial H_m evaluated by the three-term recurrence."""
    if m < 0:
        raise ValueError("Hermite degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if m == 0:
        return h_prev[()] if x.ndim == 0 else h_prev
    h = x.copy()
    for k in range(1, m):
        h_prev, h = h, x * h - k * h_prev
    return h[()] if x.ndim == 0 else h


def gamma_fn(x: float) -> float:
    """Gamma function; exact closed forms on integers and half-integers."""
    if x <= 0:
        raise ValueError("gamma_fn requires a positive argument")
    twice = 2.0 * x
    if twice == round(twice) and x <= 170:
        n2 = int(round(twice))
        if n2 % 2 == 0:
            return float(math.factorial(n2 // 2 - 1))
        n = (n2 - 1) // 2
        # Gamma(n + 1/2) = (2n)! sqrt(pi) / (4^n n!)
        return math.factorial(2 * n) / (4**n * math.factorial(n)) * math.sqrt(math.pi)
    return math.gamma(x)


def ball_volume(n: int) -> float:
    """Volume omega_n of the unit ball in R^n (omega_0 = 1)."""
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    return math.pi ** (n / 2.0) / gamma_fn(n / 2.0 + 1.0)


def flag_coefficient(n: int, m: int) -> float:
    """Klain-Rota flag coefficient C(n, m) * omega_n / (omega_m * omega_{n-m})."""
    if not 0 <= m <= n:
        raise ValueError(f"flag coefficient needs 0 <= m <= n, got n={n}, m={m}")
    return math.comb(n, m) * ball_volume(n) / (ball_volume(m) * ball_volume(n - m))


def upper_regularized_gamma(a: float, x):
    """Q(a, x) = Gamma(a, x) / Gamma(a)."""
    out = _sp.gammaincc(a, np.asarray(x, dtype=float))
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class PolyGauss:
    """The function x -> q(x) * exp(-x^2 / 2), q given by ascending coefficients."""

    coeffs: tuple

    def __post_init__(self):
        c = [float(v) for v in self.coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not c:
            c = [0.0]
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def derivative(self) -> "PolyGauss":
        return polygauss_derivative(self)

    def __call__(self, x):
        return polygauss_eval(self, x)


def polygauss_derivative(p: PolyGauss) -> PolyGauss:
    """d/dx [q e^{-x^2/2}] = (q' - x q) e^{-x^2/2}, done on coefficients."""
    q = np.asarray(p.coeffs)
    out = np.zeros(len(q) + 1)
    if len(q) > 1:
        out[: len(q) - 1] += q[1:] * np.arange(1, len(q))
    out[1:] -= q
    return PolyGauss(tuple(out))


def polygauss_eval(p: PolyGauss, x):
    x = np.asarray(x, dtype=float)
    out = np.polynomial.polynomial.polyval(x, p.coeffs) * np.exp(-0.5 * x * x)
    return out[()] if out.ndim == 0 else out


def chi_density(k: int) -> PolyGauss:
    """Density of the chi distribution with k degrees of freedom, as PolyGauss."""
    if k < 1:
        raise ValueError("k must be >= 1")
    c = np.zeros(k)
    c[k - 1] = 1.0 / (gamma_fn(k / 2.0) * 2.0 ** ((k - 2) / 2.0))
    return PolyGauss(tuple(c))
