"""Composite Gauss-Legendre rules with optional geometric grading at endpoints."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["Quadrature", "composite_gauss_legendre", "truncation_point"]


@dataclass(frozen=True)
class Quadrature:
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple
    panels: int
    points: int
    graded: tuple = (False, False)

    def integrate(self, values, axis=0):
        """Contract ``values`` (sampled at ``nodes`` along ``axis``) with the weights."""
        v = np.moveaxis(np.asarray(values), axis, -1)
        return v @ self.weights

    def describe(self) -> dict:
        return {
            "rule": "composite Gauss-Legendre",
            "interval": [float(self.interval[0]), float(self.interval[1])],
            "panels": self.panels,
            "points_per_panel": self.points,
            "graded": list(self.graded),
        }


def _breakpoints(a, b, panels, grade_left, grade_right, ratio=0.2, levels=None):
    if levels is None:
        levels = min(max(4, panels // 4), 14)
    graded_count = levels * (int(grade_left) + int(grade_right))
    uniform = max(panels - graded_count, 1)
    inner_a, inner_b = a, b
    h = (b - a) / uniform
    left, right = [], []
    if grade_left:
        # geometric panels accumulating at a, inside the first uniform panel
        left = [a + h * ratio ** i for i in range(levels, 0, -1)]
    if grade_right:
        right = [b - h * ratio ** i for i in range(1, levels + 1)]
    uni = list(np.linspace(inner_a, inner_b, uniform + 1))
    pts = [a] + left + uni[1:-1] + right[::-1] + [b]
    return np.array(sorted(set(pts)))


def composite_gauss_legendre(a, b, panels=40, points=10, grade_left=False, grade_right=False,
                             ratio=0.2, levels=None) -> Quadrature:
    """Composite rule on ``[a, b]`` with ``panels`` panels of ``points`` nodes.

    Grading places ``levels`` extra panels with geometric ratio ``ratio``
    toward an endpoint carrying an algebraic singularity.
    """
    if not (np.isfinite(a) and np.isfinite(b)) or not b > a:
        raise DomainError(f"composite rule needs a finite interval with a < b, got ({a}, {b})")
    bp = _breakpoints(float(a), float(b), int(panels), grade_left, grade_right, ratio, levels)
    x, w = np.polynomial.legendre.leggauss(int(points))
    lo, hi = bp[:-1, None], bp[1:, None]
    nodes = (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel()
    weights = (0.5 * (hi - lo) * w).ravel()
    return Quadrature(nodes, weights, (float(a), float(b)), len(bp) - 1, int(points),
                      (bool(grade_left), bool(grade_right)))


def truncation_point(f, start, direction, tol=1e-18, step=0.25, limit=1e4):
    """First point from ``start`` moving in ``direction`` where ``|f| < tol`` stays below.

    ``f`` is vectorised; the returned point is where the envelope falls under
    ``tol`` relative to its maximum over the scanned range.
    """
    xs = start + direction * np.arange(0.0, limit, step)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.abs(f(xs))
    peak = float(np.max(vals[: max(1, int(50 / step))]))
    for i in range(len(xs)):
        if np.all(vals[i : i + int(4 / step) + 1] < tol * max(peak, 1e-300)):
            return float(xs[i])
        if i > 0 and not math.isfinite(vals[i]):
            break
    raise DomainError("weight does not decay below the truncation tolerance")
