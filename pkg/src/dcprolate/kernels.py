"""Band-limiting kernels and commutation oracles.

Given orthonormal ``Psi(k, x)`` and an index window ``I``::

    K(x, y) = sum_{k in I} Psi(k, x)^T Psi(k, y)
    (T F)(y) = int_{x0}^{t} F(x) K(x, y) dx = sum_k C_k Psi(k, y),  C_k = int F Psi(k)^T
    J(m, k) = int_{x0}^{t} Psi(m, y) Psi(k, y)^T dy

A differential operator R commutes with T when ``T(F.R) = (T F).R`` for test
functions F supported in ``(x0, t)``.  The right side is evaluated with exact
jets of ``Psi``, so quadrature is the only source of error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .concomitants import discrete_edge_conditions
from .errors import ContractError
from .quadrature import Quadrature, composite_gauss_legendre, truncation_point
from .testfunctions import random_bump_function

__all__ = [
    "family_interval", "family_quadrature", "kernel_K", "kernel_J",
    "commutation_defect_continuous", "commutation_defect_discrete",
    "orthonormality_defect", "spectral_check", "DefectResult", "christoffel_darboux_defect",
]


def _t(a):
    return np.swapaxes(a, -1, -2)


def _envelope(fam, ks):
    def f(x):
        v = fam.psi_derivs(ks, np.asarray(x, dtype=float), 0)[:, 0]
        return np.max(v * v, axis=(0, -2, -1))
    return f


def family_interval(fam, x0=None, x1=None, ks=None, tol=1e-18):
    """Finite integration interval.

    Infinite ends are cut where the kernel density ``max_k |Psi(k, x)|^2`` over
    the index window stays below ``tol`` times its maximum.
    """
    lo, hi = fam.support
    x0 = lo if x0 is None else x0
    x1 = hi if x1 is None else x1
    ks = list(range(0, 13)) if ks is None else list(ks)
    env = _envelope(fam, ks)
    if not math.isfinite(x0):
        start = min(x1, 0.0) if math.isfinite(x1) else 0.0
        x0 = truncation_point(env, start - 1e-3, -1.0, tol)
    if not math.isfinite(x1):
        start = max(x0, 0.0) + 1e-3
        x1 = truncation_point(env, start, 1.0, tol)
    return float(x0), float(x1)


def family_quadrature(fam, x0=None, x1=None, panels=80, points=12, ks=None) -> Quadrature:
    """Composite rule on ``(x0, x1)`` graded toward singular support endpoints."""
    a, b = family_interval(fam, x0, x1, ks)
    lo, hi = fam.support
    ends = getattr(fam, "singular_ends", (False, False))
    gl = bool(ends[0]) and a == lo
    gr = bool(ends[1]) and b == hi
    return composite_gauss_legendre(a, b, panels, points, gl, gr)


def kernel_K(fam, I, x, y):
    """``K(x, y)`` for arrays ``x``, ``y`` of equal shape; shape ``(*x.shape, N, N)``."""
    ks = list(I)
    px = fam.psi_derivs(ks, np.asarray(x, dtype=float), 0)[:, 0]
    py = fam.psi_derivs(ks, np.asarray(y, dtype=float), 0)[:, 0]
    return np.sum(_t(px) @ py, axis=0)


def kernel_J(fam, I, quad: Quadrature):
    """Block matrix ``[J(m, k)]`` of size ``(|I| N, |I| N)``."""
    ks = list(I)
    p = fam.psi_derivs(ks, quad.nodes, 0)[:, 0]  # (K, X, N, N)
    n = fam.n
    J = np.einsum("x,mxab,kxcb->makc", quad.weights, p, p)
    return J.reshape(len(ks) * n, len(ks) * n)


def orthonormality_defect(fam, I, quad: Quadrature = None) -> float:
    quad = family_quadrature(fam, panels=80, points=12, ks=I) if quad is None else quad
    J = kernel_J(fam, I, quad)
    return float(np.max(np.abs(J - np.eye(J.shape[0]))))


def christoffel_darboux_defect(fam, Lx, n, x, y, untransposed=False) -> float:
    """Relative defect of the Christoffel-Darboux form of ``K`` on ``0..n``.

    ``Lx`` is the shift image of ``x``, ``H_1(k) S + H_0(k) + H_1(k-1)^T S^-1``.
    The identity is ``(x - y) K(x, y) = Psi(n+1, x)^T H_1(n)^T Psi(n, y)
    - Psi(n, x)^T H_1(n) Psi(n+1, y)``; ``untransposed=True`` uses ``H_1(n)`` in
    both terms, which agrees only when ``H_1(n)`` is symmetric.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    H = Lx.coef(1, n)
    first = H if untransposed else H.T
    px = fam.psi_derivs([n, n + 1], x, 0)[:, 0]
    py = fam.psi_derivs([n, n + 1], y, 0)[:, 0]
    lhs = (x - y)[..., None, None] * kernel_K(fam, range(0, n + 1), x, y)
    rhs = _t(px[1]) @ first @ py[0] - _t(px[0]) @ H @ py[1]
    return float(np.max(np.abs(lhs - rhs)) / max(float(np.max(np.abs(lhs))), 1e-300))


@dataclass
class DefectResult:
    relative: float
    absolute: float
    scale: float
    trials: int = 1

    def as_dict(self):
        return {"relative": self.relative, "absolute": self.absolute,
                "scale": self.scale, "trials": self.trials}


def _check_grid(a, b, count=200):
    x, _ = np.polynomial.legendre.leggauss(count)
    return 0.5 * (b - a) * x + 0.5 * (b + a)


def commutation_defect_continuous(fam, R, I, x0=None, t=None, trials=8, panels=80, points=12,
                                  seed=0, check_points=200, full=False):
    """Max over random bump F of ``|T(F.R) - (T F).R|`` relative to the larger side.

    ``x0`` defaults to the lower support end (truncated when infinite).
    """
    ks = list(I)
    a, b = family_interval(fam, x0, t, ks)
    rng = np.random.default_rng(seed)
    n = fam.n
    m = max(R.order, 0)
    ys = _check_grid(a, b, check_points)
    py = fam.psi_derivs(ks, ys, m)  # (K, m+1, Y, N, N)
    psiR = np.stack([R.apply_jets(py[i], ys)[0] for i in range(len(ks))])  # (K, Y, N, N)
    worst_rel, worst_abs, worst_scale = 0.0, 0.0, 0.0
    for _ in range(int(trials)):
        F = random_bump_function(rng, a, b, n)
        quad = composite_gauss_legendre(F.support[0], F.support[1], panels, points)
        xq = quad.nodes
        Fj = F.derivs(xq, m)
        FR = R.apply_jets(Fj, xq)[0]
        px = fam.psi_derivs(ks, xq, 0)[:, 0]
        C = np.einsum("x,xab,kxcb->kac", quad.weights, Fj[0], px)
        CR = np.einsum("x,xab,kxcb->kac", quad.weights, FR, px)
        lhs = np.einsum("kac,kycb->yab", CR, py[:, 0])
        rhs = np.einsum("kac,kycb->yab", C, psiR)
        diff = float(np.max(np.abs(lhs - rhs)))
        scale = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))), 1e-300)
        if diff / scale >= worst_rel:
            worst_rel, worst_abs, worst_scale = diff / scale, diff, scale
    res = DefectResult(worst_rel, worst_abs, worst_scale, int(trials))
    return res if full else res.relative


def commutation_defect_discrete(fam, L, I, quad: Quadrature = None, t=None, enforce_edges=True,
                                tol=1e-8, full=False):
    """``||J L - L J|| / (||J|| ||L||)`` in the spectral norm on the window ``I``.

    ``L`` is truncated to ``I``; with ``enforce_edges`` the couplings leaving
    the window must vanish (relative ``tol``) or a ContractError names them.
    """
    ks = list(I)
    k0, k1 = ks[0], ks[-1]
    if quad is None:
        quad = family_quadrature(fam, None, t, ks=ks)
    Lm = L.matrix(k0, k1)
    if enforce_edges:
        scale = max(float(np.max(np.abs(Lm))), 1e-300)
        bad = []
        for upper, edge in ((True, k1), (False, k0)):
            for (j, q), v in discrete_edge_conditions(L, edge, upper):
                if np.max(np.abs(v)) > tol * scale:
                    bad.append(f"A_{j}({q})")
        if bad:
            raise ContractError("coefficients leaving the index window do not vanish: " + ", ".join(bad))
    J = kernel_J(fam, ks, quad)
    C = J @ Lm - Lm @ J
    num = float(np.linalg.norm(C, 2))
    scale = float(np.linalg.norm(J, 2) * np.linalg.norm(Lm, 2))
    res = DefectResult(num / max(scale, 1e-300), num, scale)
    return res if full else res.relative


def spectral_check(fam, R, I, x0=None, t=None, nev=5, panels=40, points=10):
    """Largest eigenvector residual of R on the top ``nev`` eigenfunctions of T.

    T is discretised by Nystrom on a composite rule; each eigenfunction
    ``f = (1/mu) sum_k C_k Psi(k, .)`` is differentiated exactly, and the
    residual is ``||f.R - rho f|| / ||f.R||`` with ``rho`` the Rayleigh
    quotient, in the discrete L2 norm of the rule.  Scalar families only use
    the (0, 0) entry.
    """
    ks = list(I)
    quad = family_quadrature(fam, x0, t, panels, points, ks)
    x, w = quad.nodes, quad.weights
    m = max(R.order, 0)
    p = fam.psi_derivs(ks, x, m)  # (K, m+1, X, N, N)
    n = fam.n
    # Nystrom matrix on vector-valued functions: row vector f(x) in R^N
    # (T f)(y) = int f(x) K(x, y) dx
    sw = np.sqrt(w)
    Kmat = np.einsum("kxab,kyac->xbyc", p[:, 0], p[:, 0])  # K(x,y)[b,c] with f row index b
    X = x.size
    A = (sw[:, None, None, None] * Kmat * sw[None, None, :, None]).reshape(X * n, X * n)
    A = 0.5 * (A + A.T)
    vals, vecs = np.linalg.eigh(A)
    order = np.argsort(vals)[::-1][:nev]
    psiR = np.stack([R.apply_jets(p[i], x)[0] for i in range(len(ks))])  # (K, X, N, N)
    worst = 0.0
    for idx in order:
        mu = vals[idx]
        v = vecs[:, idx].reshape(X, n)
        f = v / sw[:, None]  # row-vector function values
        # coefficients C_k = int f Psi(k)^T  (row vectors)
        C = np.einsum("x,xb,kxcb->kc", w, f, p[:, 0]) / mu
        fx = np.einsum("kc,kxcb->xb", C, p[:, 0])
        fR = np.einsum("kc,kxcb->xb", C, psiR)
        ip = lambda u, v: float(np.sum(w[:, None] * u * v))
        rho = ip(fx, fR) / ip(fx, fx)
        r = fR - rho * fx
        worst = max(worst, math.sqrt(ip(r, r) / max(ip(fR, fR), 1e-300)))
    return worst
