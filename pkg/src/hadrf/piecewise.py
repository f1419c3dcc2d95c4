"""Continuous, piecewise C^2 functions of one real variable."""

from __future__ import annotations

from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np


def _poly(coeffs):
    c = np.asarray(coeffs, dtype=float)
    return lambda x: np.polynomial.polynomial.polyval(x, c)


class Piecewise1D:
    """A continuous function given by pieces between sorted breakpoints.

    Piece ``i`` is used on ``[breakpoints[i-1], breakpoints[i])``; the first
    piece extends to -inf and the last to +inf. Pieces must be vectorized
    callables. Functions built from polynomial coefficients remember them so
    they can be written back to JSON.
    """

    def __init__(
        self,
        breakpoints: Sequence[float],
        pieces: Sequence[Callable],
        coeffs: Optional[Sequence[Sequence[float]]] = None,
        check_continuity: bool = True,
    ):
        self.breakpoints = np.asarray(breakpoints, dtype=float).ravel()
        self.pieces = list(pieces)
        self.coeffs = None if coeffs is None else [list(map(float, c)) for c in coeffs]
        if len(self.pieces) != len(self.breakpoints) + 1:
            raise ValueError("need exactly one more piece than breakpoints")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if check_continuity:
            for i, b in enumerate(self.breakpoints):
                left = float(self.pieces[i](np.array([b]))[0])
                right = float(self.pieces[i + 1](np.array([b]))[0])
                if abs(left - right) > 1e-9 * max(1.0, abs(left), abs(right)):
                    raise ValueError(f"function jumps at breakpoint {b}: {left} vs {right}")

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "Piecewise1D":
        """Single polynomial piece, coefficients in ascending order."""
        return cls([], [_poly(coeffs)], coeffs=[coeffs])

    @classmethod
    def from_polynomials(cls, breakpoints, coeffs) -> "Piecewise1D":
        return cls(breakpoints, [_poly(c) for c in coeffs], coeffs=coeffs)

    @classmethod
    def from_callable(cls, fn: Callable, breakpoints=()) -> "Piecewise1D":
        return cls(breakpoints, [fn] * (len(breakpoints) + 1), check_continuity=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if len(self.pieces) == 1:
            out = np.asarray(self.pieces[0](x), dtype=float)
            out = np.broadcast_to(out, x.shape).astype(float)
            return out[()] if x.ndim == 0 else out
        flat = x.ravel()
        idx = np.searchsorted(self.breakpoints, flat, side="right")
        out = np.empty_like(flat)
        for i, piece in enumerate(self.pieces):
            sel = idx == i
            if sel.any():
                out[sel] = piece(flat[sel])
        out = out.reshape(x.shape)
        return out[()] if x.ndim == 0 else out

    def compose(self, inner: "Piecewise1D") -> "Piecewise1D":
        """The function x -> self(inner(x))."""
        outer = self
        kinks = list(inner.breakpoints)
        if len(outer.breakpoints):
            # preimages of the outer breakpoints, located on a grid then bisected
            x = np.linspace(-38.0, 38.0, 76001)
            y = inner(x)
            for b in outer.breakpoints:
                for t in np.flatnonzero(np.diff(np.sign(y - b)) != 0):
                    lo, hi = x[t], x[t + 1]
                    below = inner(lo) < b
                    for _ in range(60):
                        mid = 0.5 * (lo + hi)
                        if (inner(mid) < b) == below:
                            lo = mid
                        else:
                            hi = mid
                    kinks.append(0.5 * (lo + hi))
        kinks = np.unique(np.asarray(kinks, dtype=float))
        return Piecewise1D.from_callable(lambda x: outer(inner(x)), kinks)

    def to_json(self) -> dict:
        if self.coeffs is None:
            raise ValueError("only polynomial pieces can be serialized")
        return {"kind": "piecewise1d", "breakpoints": self.breakpoints.tolist(), "pieces": self.coeffs}

    @cached_property
    def is_identity(self) -> bool:
        if self.coeffs is None or len(self.coeffs) != 1:
            return False
        return np.trim_zeros(np.asarray(self.coeffs[0]), "b").tolist() == [0.0, 1.0]

    def __repr__(self):
        if self.coeffs is not None:
            return f"Piecewise1D(breakpoints={self.breakpoints.tolist()}, pieces={self.coeffs})"
        return f"Piecewise1D(breakpoints={self.breakpoints.tolist()}, <callables>)"
