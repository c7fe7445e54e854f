"""Smooth compactly supported matrix test functions with exact jets."""
from __future__ import annotations

import numpy as np

from .expr import exp, power, var
from .families import leibniz

__all__ = ["Bump", "BumpMatrixFunction", "PolynomialMatrixFunction", "random_bump_function"]


class Bump:
    """``exp(-1/(1-s^2))`` with ``s = (x-c)/r`` inside ``|s| < 1`` and 0 outside."""

    def __init__(self, center: float, radius: float):
        self.center = float(center)
        self.radius = float(radius)
        s = (var() - self.center) / self.radius
        self._expr = exp(-power(1 - s * s, -1))

    @property
    def support(self):
        return (self.center - self.radius, self.center + self.radius)

    def derivs(self, x, d):
        x = np.asarray(x, dtype=float)
        out = np.zeros((d + 1,) + x.shape)
        inside = np.abs(x - self.center) < self.radius * (1 - 1e-9)
        if np.any(inside):
            out[:, inside] = self._expr.derivs(x[inside], d)
        return out


class PolynomialMatrixFunction:
    """``sum_i C_i x^i`` with ``C_i`` of shape ``(R, N)``."""

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=float)

    def derivs(self, x, d):
        x = np.asarray(x, dtype=float)
        deg = self.coeffs.shape[0] - 1
        out = np.zeros((d + 1,) + x.shape + self.coeffs.shape[1:])
        for r in range(d + 1):
            for i in range(r, deg + 1):
                fall = 1.0
                for q in range(r):
                    fall *= i - q
                out[r] += fall * (x ** (i - r))[..., None, None] * self.coeffs[i]
        return out


class BumpMatrixFunction:
    """Bump times a matrix polynomial; all derivatives exact."""

    def __init__(self, bump: Bump, poly: PolynomialMatrixFunction):
        self.bump = bump
        self.poly = poly

    @property
    def support(self):
        return self.bump.support

    def derivs(self, x, d):
        b = self.bump.derivs(x, d)[..., None, None]
        return leibniz(b, self.poly.derivs(x, d))


def random_bump_function(rng, lo, hi, n, rows=None, degree=3):
    """Random bump function with support strictly inside ``(lo, hi)``."""
    rows = n if rows is None else rows
    width = hi - lo
    a = lo + width * rng.uniform(0.02, 0.3)
    b = hi - width * rng.uniform(0.02, 0.3)
    c = 0.5 * (a + b)
    coeffs = rng.standard_normal((degree + 1, rows, n))
    # keep the polynomial of moderate size on the support
    scale = max(abs(a), abs(b), 1.0)
    coeffs /= scale ** np.arange(degree + 1)[:, None, None]
    return BumpMatrixFunction(Bump(c, 0.5 * (b - a)), PolynomialMatrixFunction(coeffs))
