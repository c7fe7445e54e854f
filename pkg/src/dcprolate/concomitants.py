"""Continuous and discrete bilinear concomitants and adjointability defects.

For a differential operator ``D = sum_j d^j A_j`` and matrix functions F, G::

    int_{x0}^{x1} (F.D) G^T - F (G.D*)^T dx = C_D(F, G; x1) - C_D(F, G; x0)

and for a shift operator ``L = sum_n A_n(k) S^n``::

    sum_{k=m}^{n} (L.F)(k)^T G(k) - F(k)^T (L*.G)(k) = C_L(F, G; n) - C_L(F, G; m-1)
"""
from __future__ import annotations

from math import comb

import numpy as np

from .errors import ContractError
from .operators import DifferentialOperator, ShiftOperator, symmetric_form_diff
from .quadrature import composite_gauss_legendre

__all__ = [
    "continuous_concomitant", "continuous_concomitant_sum", "concomitant_matrix",
    "continuous_adjointability_defect", "discrete_concomitant",
    "discrete_adjointability_defect", "concomitant_vanishing_conditions",
    "discrete_edge_conditions", "continuous_edge_conditions",
]


def _t(a):
    return np.swapaxes(a, -1, -2)


def concomitant_matrix(D: DifferentialOperator, x):
    """Blocks ``M[a][b]`` with ``C_D(F,G;x) = sum_ab F^(a) M_ab G^(b)T``.

    Returns an array of shape ``(m, m, *x.shape, N, N)``; entry ``(a, b)`` is
    ``sum_{j>=a+b+1} (-1)^(j-1-a) C(j-1-a, b) A_j^(j-1-a-b)``.
    """
    x = np.asarray(x, dtype=float)
    m = D.order
    n = D.n
    if m <= 0:
        return np.zeros((0, 0) + x.shape + (n, n))
    jets = [D.coeffs[j].derivs(x, j - 1) for j in range(1, m + 1)]
    out = np.zeros((m, m) + x.shape + (n, n))
    for a in range(m):
        for b in range(m - a):
            for j in range(a + b + 1, m + 1):
                i = j - 1 - a
                out[a, b] += (-1) ** i * comb(i, b) * jets[j - 1][i - b]
    return out


def continuous_concomitant(D: DifferentialOperator, Fj, Gj, x):
    """Quadratic-form evaluation from the block matrix.

    ``Fj``, ``Gj`` hold derivatives of orders ``0..m-1`` (axis 0) at ``x``.
    """
    m = D.order
    if m <= 0:
        return np.zeros(np.asarray(Fj).shape[1:-1] + (np.asarray(Gj).shape[-2],))
    Fj = np.asarray(Fj, dtype=float)
    Gj = np.asarray(Gj, dtype=float)
    if Fj.shape[0] < m or Gj.shape[0] < m:
        raise ContractError(f"concomitant of order {m} needs derivatives up to order {m - 1}")
    M = concomitant_matrix(D, x)
    out = 0.0
    for a in range(m):
        for b in range(m - a):
            out = out + Fj[a] @ M[a, b] @ _t(Gj[b])
    return out


def continuous_concomitant_sum(D: DifferentialOperator, Fj, Gj, x):
    """Double-sum definition ``sum_j sum_i (-1)^i F^(j-1-i) (G A_j^T)^(i)T``."""
    m = D.order
    Fj = np.asarray(Fj, dtype=float)
    Gj = np.asarray(Gj, dtype=float)
    if m <= 0:
        return np.zeros(Fj.shape[1:-1] + (Gj.shape[-2],))
    if Fj.shape[0] < m or Gj.shape[0] < m:
        raise ContractError(f"concomitant of order {m} needs derivatives up to order {m - 1}")
    out = 0.0
    for j in range(1, m + 1):
        aj = D.coeffs[j].derivs(x, j - 1)
        for i in range(j):
            gat = sum(comb(i, l) * (Gj[l] @ _t(aj[i - l])) for l in range(i + 1))
            out = out + (-1) ** i * (Fj[j - 1 - i] @ _t(gat))
    return out


def continuous_adjointability_defect(D: DifferentialOperator, F, G, x0, x1, panels=200, points=12):
    """``int (F.D)G^T - F(G.D*)^T`` minus the boundary concomitant difference.

    ``F`` and ``G`` expose ``derivs(x, d)``; ``x0 < x1`` finite.  When both
    carry a ``support`` attribute, the integral runs over the overlap of the
    supports, where all the quadrature nodes are then spent.
    """
    Ds = D.adjoint()
    m = max(D.order, 0)
    a, b = x0, x1
    if hasattr(F, "support") and hasattr(G, "support"):
        a = max(a, F.support[0], G.support[0])
        b = min(b, F.support[1], G.support[1])
    if b <= a:
        a, b = x0, x1
    quad = composite_gauss_legendre(a, b, panels, points)
    xs = quad.nodes
    Fj = F.derivs(xs, m)
    Gj = G.derivs(xs, m)
    left = D.apply_jets(Fj, xs)[0] @ _t(Gj[0])
    right = Fj[0] @ _t(Ds.apply_jets(Gj, xs)[0])
    integral = np.tensordot(quad.weights, left - right, axes=(0, 0))
    if m == 0:
        return integral
    ends = np.array([x0, x1])
    Fe = F.derivs(ends, m - 1)
    Ge = G.derivs(ends, m - 1)
    c1 = continuous_concomitant(D, Fe[:, 1], Ge[:, 1], x1)
    c0 = continuous_concomitant(D, Fe[:, 0], Ge[:, 0], x0)
    return integral - (c1 - c0)


# ---------------------------------------------------------------------------

def _cs(ell, F, G, z):
    return sum(_t(F(z + i)) @ G(z + i - ell) for i in range(1, ell + 1))


def discrete_concomitant(L: ShiftOperator, F, G, z: int):
    """``sum_n C_{S^n}(F, A_n^T G; z) - C_{S^n}(A_{-n}^T G, F; z)^T``."""
    out = None
    for nn, c in L.coeffs.items():
        if nn > 0:
            term = _cs(nn, F, lambda k, c=c: _t(c(k)) @ G(k), z)
        elif nn < 0:
            term = -_t(_cs(-nn, lambda k, c=c: _t(c(k)) @ G(k), F, z))
        else:
            continue
        out = term if out is None else out + term
    if out is None:
        return np.zeros((np.asarray(F(z)).shape[-1], np.asarray(G(z)).shape[-1]))
    return out


def discrete_adjointability_defect(L: ShiftOperator, F, G, m: int, n: int):
    """Summation-by-parts defect over ``k = m..n``; zero up to rounding."""
    Ls = L.adjoint()
    total = 0.0
    for k in range(m, n + 1):
        total = total + _t(L.apply(F, k)) @ G(k) - _t(F(k)) @ Ls.apply(G, k)
    return total - (discrete_concomitant(L, F, G, n) - discrete_concomitant(L, F, G, m - 1))


# ---------------------------------------------------------------------------
# boundary conditions

def discrete_edge_conditions(L: ShiftOperator, k1: int, upper: bool = True):
    """Coefficient values forced to vanish for a window edge at ``k1``.

    Upper edge: ``A_j(q)`` for ``j > 0`` and ``q`` in ``[k1-j+1, k1]``.
    Lower edge (``k1`` the first index): ``A_{-j}(q)`` for ``q`` in ``[k1, k1+j-1]``.
    Returns a list of ``((j, q), value)``.
    """
    out = []
    for j, c in sorted(L.coeffs.items()):
        if upper and j > 0:
            for q in range(k1 - j + 1, k1 + 1):
                out.append(((j, q), c(q)))
        if not upper and j < 0:
            for q in range(k1, k1 - j):
                out.append(((j, q), c(q)))
    return out


def continuous_edge_conditions(D: DifferentialOperator, x1: float):
    """All blocks of the concomitant matrix at ``x1``; shape ``(m, m, N, N)``."""
    return concomitant_matrix(D, np.asarray(float(x1)))


def concomitant_vanishing_conditions(op, boundary, xs=None):
    """Canonical-form boundary data that must vanish.

    For a symmetric shift operator the conditions are the edge coefficients
    (see :func:`discrete_edge_conditions`).  For a symmetric differential
    operator ``sum d^i A_i d^i + sum {d^(2i-1), B_i}`` they are
    ``A_i^(j)(x1)`` and ``B_i^(j)(x1)`` for ``0 <= j < i``.  Returns a list of
    ``(label, matrix)``.
    """
    if isinstance(op, ShiftOperator):
        if not op.is_symmetric():
            raise ContractError("concomitant conditions need a formally symmetric operator")
        return [(f"A_{j}({q})", v) for (j, q), v in discrete_edge_conditions(op, int(boundary))]
    A, B = symmetric_form_diff(op, xs)
    x1 = np.asarray(float(boundary))
    out = []
    for i in range(1, len(A)):
        aj = A[i].derivs(x1, max(i - 1, 0))
        for j in range(i):
            out.append((f"A_{i}^({j})", aj[j]))
        if B[i] is not None and not B[i].is_zero():
            bj = B[i].derivs(x1, max(i - 1, 0))
            for j in range(i):
                out.append((f"B_{i}^({j})", bj[j]))
    return out
