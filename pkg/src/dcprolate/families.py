"""Classical discrete-continuous bispectral functions.

Each family provides ``Psi(k, x) = pi_k(x) w(x) I_N`` where ``pi_k`` are the
orthonormal polynomials of the weight ``w(x)**2``.  They satisfy

    L . Psi(k, x) = Psi(k, x) x,     Psi(k, x) . D = lambda(k) Psi(k, x).

Values and x-derivatives are computed pointwise from the three-term
recurrence (differentiated term by term) and the exact jets of ``w``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import special

from .errors import ConstructionError, DomainError
from .expr import ScalarExpr, const, exp, power, var
from .operators import DifferentialOperator, FourierPair, ShiftOperator

__all__ = [
    "BispectralTriple", "classical_triple", "hermite", "laguerre", "jacobi",
    "monomial", "psi_eval", "eigenvalue_lambda", "derivative_pairs",
    "pair_defect", "leibniz", "FAMILY_INFO",
]

MAX_DERIV = 8


def leibniz(u, v):
    """Derivatives of a product from derivatives of the factors (axis 0)."""
    d = u.shape[0] - 1
    out = np.zeros(np.broadcast_shapes(u.shape, v.shape))
    for r in range(d + 1):
        for i in range(r + 1):
            out[r] += math.comb(r, i) * u[i] * v[r - i]
    return out


@dataclass(eq=False)
class BispectralTriple:
    """Scalar classical family tensored with ``I_N``.

    Attributes
    ----------
    name : str
    n : int
        Matrix size N.
    support : (float, float)
    weight : ScalarExpr
        ``w(x)``; ``Psi(k, x) = pi_k(x) w(x)``.
    rec_a, rec_b : callable
        Off-diagonal and diagonal recurrence coefficients ``A(k)``, ``B(k)``.
    pi0 : float
        Constant polynomial ``pi_0``.
    lam : callable
        Eigenvalue ``lambda(k)``.
    L, D : ShiftOperator, DifferentialOperator
    params : dict
    """

    name: str
    n: int
    support: tuple
    weight: ScalarExpr
    rec_a: object
    rec_b: object
    pi0: float
    lam: object
    L: ShiftOperator
    D: DifferentialOperator
    params: dict = field(default_factory=dict)
    kmin: int = 0
    singular_ends: tuple = (False, False)

    # -- evaluation ------------------------------------------------------
    def _check_x(self, x):
        lo, hi = self.support
        if np.any(x <= lo) or np.any(x >= hi):
            raise DomainError(f"x outside the support ({lo}, {hi})")

    def poly_derivs(self, kmax, x, d):
        """``pi_k^(j)(x)`` for ``k=0..kmax``, shape ``(kmax+1, d+1, *x.shape)``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros((kmax + 1, d + 1) + x.shape)
        if kmax < 0:
            return out
        out[0, 0] = self.pi0
        prev = np.zeros((d + 1,) + x.shape)
        for k in range(kmax):
            cur = out[k]
            a_next = self.rec_a(k + 1)
            nxt = (x - self.rec_b(k)) * cur - self.rec_a(k) * prev
            nxt[1:] += np.arange(1, d + 1).reshape((-1,) + (1,) * x.ndim) * cur[:-1]
            out[k + 1] = nxt / a_next
            prev = cur
        return out

    def scalar_derivs(self, kmax, x, d=0):
        """Scalar ``psi_k^(j)(x)`` for ``k=0..kmax``; shape ``(kmax+1, d+1, *x.shape)``."""
        x = np.asarray(x, dtype=float)
        self._check_x(x)
        p = self.poly_derivs(kmax, x, d)
        w = self.weight.derivs(x, d)
        return leibniz(np.moveaxis(p, 1, 0), w[:, None]).swapaxes(0, 1)

    def psi_derivs(self, ks, x, d=0):
        """Matrix jets ``Psi^(j)(k, x)``; shape ``(len(ks), d+1, *x.shape, N, N)``.

        Indices below ``kmin`` give zero (``Psi(-1, x) = 0``).
        """
        ks = np.atleast_1d(np.asarray(ks, dtype=int))
        x = np.asarray(x, dtype=float)
        kmax = int(max(ks.max(), 0))
        s = self.scalar_derivs(kmax, x, d)
        out = np.zeros((ks.size, d + 1) + x.shape)
        for i, k in enumerate(ks):
            if k >= self.kmin:
                out[i] = s[k]
        return out[..., None, None] * np.eye(self.n)

    def psi(self, k, x, d=0):
        """List-free jet array ``(d+1, *x.shape, N, N)`` for one index."""
        if d > MAX_DERIV:
            raise DomainError(f"derivative order {d} exceeds {MAX_DERIV}")
        return self.psi_derivs([k], x, d)[0]

    def poly_coefficients(self, k):
        """Ascending coefficients of ``pi_k`` from the recurrence in coefficient space."""
        prev = np.zeros(1)
        cur = np.array([self.pi0])
        for j in range(k):
            nxt = npoly.polysub(npoly.polysub(npoly.polymulx(cur), self.rec_b(j) * cur),
                                self.rec_a(j) * prev) / self.rec_a(j + 1)
            prev, cur = cur, nxt
        return cur

    @property
    def lam_op(self) -> ShiftOperator:
        return ShiftOperator.multiplication(self.n, lambda k: self.lam(k), window=self.L.window)

    def x_op(self) -> DifferentialOperator:
        return DifferentialOperator(self.n, [var()], self.support)


# ---------------------------------------------------------------------------

def _tridiagonal(n, a, b, window=(0, None)):
    return ShiftOperator(
        n,
        {-1: lambda k: a(k), 0: lambda k: b(k), 1: lambda k: a(k + 1)},
        window=window,
    )


def hermite(N: int = 1) -> BispectralTriple:
    """``Psi(k, x) = h_k(x) exp(-x^2/2)`` with ``D = d^2 - x^2 + 1``, ``lambda = -2k``."""
    _check_n(N)
    x = var()
    a = lambda k: math.sqrt(k / 2.0) if k > 0 else 0.0
    b = lambda k: 0.0
    L = _tridiagonal(N, a, b)
    support = (-math.inf, math.inf)
    D = DifferentialOperator(N, [1 - x ** 2, 0.0, 1.0], support, name="D")
    return BispectralTriple(
        "hermite", N, support, exp(-(x ** 2) / 2), a, b, math.pi ** -0.25,
        lambda k: -2.0 * k, L, D, {},
    )


def laguerre(a: float, N: int = 1) -> BispectralTriple:
    """``Psi(k, x) = l_k(x) x^(a/2) exp(-x/2)`` on ``(0, inf)``, ``lambda = -k``."""
    _check_n(N)
    a = float(a)
    if not a > -1:
        raise ConstructionError(f"Laguerre parameter must satisfy a > -1, got a={a}")
    x = var()
    A = lambda k: -math.sqrt(k * (k + a)) if k > 0 else 0.0
    B = lambda k: 2.0 * k + 1.0 + a
    L = _tridiagonal(N, A, B)
    support = (0.0, math.inf)
    q = 0.5 - (a * a / 4.0) * power(x, -1) + a / 2.0 - x / 4.0
    D = DifferentialOperator(N, [q, 1.0, x], support, name="D")
    w = power(x, a / 2.0) * exp(-x / 2) if a != 0 else exp(-x / 2)
    pi0 = 1.0 / math.sqrt(math.gamma(a + 1.0))
    return BispectralTriple(
        "laguerre", N, support, w, A, B, pi0, lambda k: -float(k), L, D, {"a": a},
        singular_ends=(True, False),
    )


def jacobi(a: float, b: float, N: int = 1) -> BispectralTriple:
    """``Psi(k, x) = j_k(x) (1-x)^(a/2) (1+x)^(b/2)`` on ``(-1, 1)``.

    ``lambda(k) = -k(k+a+b+1)``.
    """
    _check_n(N)
    a, b = float(a), float(b)
    if not (a > -1 and b > -1):
        raise ConstructionError(f"Jacobi parameters must satisfy a > -1 and b > -1, got a={a}, b={b}")
    s = a + b

    def A(k):
        if k <= 0:
            return 0.0
        if k == 1:
            return 2.0 * math.sqrt((1 + a) * (1 + b) / ((2 + s) ** 2 * (3 + s)))
        m = 2 * k + s
        return (2.0 / m) * math.sqrt(k * (k + a) * (k + b) * (k + s) / (m * m - 1.0))

    def B(k):
        if k == 0:
            return (b - a) / (s + 2.0)
        return (b * b - a * a) / ((2 * k + 2 + s) * (2 * k + s))

    L = _tridiagonal(N, A, B)
    x = var()
    support = (-1.0, 1.0)
    q = (a * a / 2.0) * power(x - 1, -1) - (b * b / 2.0) * power(x + 1, -1) + s * (s + 2) / 4.0
    D = DifferentialOperator(N, [q, -2 * x, 1 - x ** 2], support, name="D")
    w = const(1.0)
    if a != 0:
        w = w * power(1 - x, a / 2.0)
    if b != 0:
        w = w * power(1 + x, b / 2.0)
    log_norm = (s + 1) * math.log(2.0) + special.betaln(a + 1, b + 1)
    pi0 = math.exp(-0.5 * log_norm)
    return BispectralTriple(
        "jacobi", N, support, w, A, B, pi0, lambda k: -float(k) * (k + s + 1), L, D,
        {"a": a, "b": b}, singular_ends=(True, True),
    )


class MonomialTriple(BispectralTriple):
    """``Psi(k, x) = x^k I_N`` on ``(0, inf)`` for every integer ``k``."""

    def scalar_derivs(self, kmax, x, d=0):
        return self._monomial(np.arange(0, kmax + 1), x, d)

    def _monomial(self, ks, x, d):
        x = np.asarray(x, dtype=float)
        self._check_x(x)
        out = np.zeros((len(ks), d + 1) + x.shape)
        for i, k in enumerate(ks):
            c = 1.0
            for j in range(d + 1):
                out[i, j] = c * x ** (k - j)
                c *= k - j
        return out

    def psi_derivs(self, ks, x, d=0):
        ks = np.atleast_1d(np.asarray(ks, dtype=int))
        return self._monomial(ks, x, d)[..., None, None] * np.eye(self.n)

    def poly_coefficients(self, k):
        c = np.zeros(k + 1)
        c[k] = 1.0
        return c


def monomial(N: int = 1) -> MonomialTriple:
    """``S . Psi = Psi x`` and ``Psi . (d x) = k Psi``."""
    _check_n(N)
    x = var()
    L = ShiftOperator(N, {1: np.eye(N)})
    support = (0.0, math.inf)
    D = DifferentialOperator(N, [0.0, x], support, name="D")
    return MonomialTriple(
        "monomial", N, support, const(1.0), None, None, 1.0, lambda k: float(k), L, D, {},
        kmin=-(10 ** 9),
    )


def _check_n(N):
    if int(N) < 1:
        raise ConstructionError(f"matrix size must be >= 1, got {N}")


FAMILY_INFO = {
    "hermite": "Hermite, support (-inf, inf); no parameters",
    "laguerre": "Laguerre, support (0, inf); requires a > -1",
    "jacobi": "Jacobi, support (-1, 1); requires a > -1 and b > -1",
    "monomial": "x^k I_N, support (0, inf); no parameters",
}


def classical_triple(name: str, a=None, b=None, N: int = 1) -> BispectralTriple:
    name = name.lower()
    if name == "hermite":
        return hermite(N)
    if name == "laguerre":
        if a is None:
            raise ConstructionError("Laguerre requires parameter a > -1")
        return laguerre(a, N)
    if name == "jacobi":
        if a is None or b is None:
            raise ConstructionError("Jacobi requires parameters a > -1 and b > -1")
        return jacobi(a, b, N)
    if name == "monomial":
        return monomial(N)
    raise ConstructionError(f"unknown classical family {name!r}")


def psi_eval(fam, k: int, x, d: int = 0):
    """List ``[Psi, Psi', ..., Psi^(d)]`` at ``(k, x)``."""
    if d > MAX_DERIV:
        raise DomainError(f"derivative order {d} exceeds {MAX_DERIV}")
    jets = fam.psi_derivs([k], x, d)[0]
    return [jets[j] for j in range(d + 1)]


def eigenvalue_lambda(fam, k: int) -> float:
    return fam.lam(k)


def derivative_pairs(fam):
    """Generating Fourier pairs ``(L, x)``, ``(lambda(k), D)`` and, for Hermite, ``(., d)``."""
    pairs = [
        FourierPair(fam.L, fam.x_op(), "x"),
        FourierPair(fam.lam_op, fam.D, "D"),
    ]
    if fam.name == "hermite":
        n = fam.n
        P = ShiftOperator(n, {-1: lambda k: math.sqrt(k / 2.0) if k > 0 else 0.0,
                              1: lambda k: -math.sqrt((k + 1) / 2.0)}, window=(0, None))
        pairs.append(FourierPair(P, DifferentialOperator.d(n, fam.support), "d"))
    return pairs


def pair_defect(fam, pair: FourierPair, ks, xs):
    """Relative defect ``max |P.Psi - Psi.R| / max(|P.Psi|, |Psi.R|)`` on a grid."""
    xs = np.asarray(xs, dtype=float)
    ks = list(ks)
    m = max(pair.D.order, 0)
    radius = max((abs(j) for j in pair.L.coeffs), default=0)
    kk = np.arange(min(ks) - radius, max(ks) + radius + 1)
    table = fam.psi_derivs(kk, xs, m)
    lookup = {int(k): table[i] for i, k in enumerate(kk)}
    num = 0.0
    den = 0.0
    for k in ks:
        left = pair.L.apply(lambda j: lookup[j][0], k)
        right = pair.D.apply_jets(lookup[k], xs)[0]
        num = max(num, float(np.max(np.abs(left - right))))
        den = max(den, float(np.max(np.abs(left))), float(np.max(np.abs(right))))
    return num / den if den > 0 else num
