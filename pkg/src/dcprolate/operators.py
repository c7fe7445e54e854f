"""Banded shift operators on Z and right-acting differential operators.

Shift operators act on the left of functions of ``k``::

    (L.F)(k) = sum_j A_j(k) F(k+j)

Differential operators are stored in right-coefficient normal form
``sum_n d^n B_n(x)`` and act on the right of functions of ``x``::

    F.D = sum_n F^(n)(x) B_n(x)

Products of differential operators are read in action order, so
``F.(D1 D2) = (F.D1).D2``.  In this convention the word ``x d`` acts as
``F -> (F x)'`` and therefore ``x d - d x`` is the constant 1.
"""
from __future__ import annotations

from math import comb
from numbers import Real

import numpy as np

from .errors import ContractError, DomainError, ShapeError
from .expr import MatrixExpr, ScalarExpr, as_expr, const, var

__all__ = [
    "ShiftOperator", "DifferentialOperator", "FourierPair",
    "shift_apply", "shift_compose", "shift_adjoint",
    "diff_apply_right", "diff_compose", "diff_adjoint",
    "symmetric_form_shift", "symmetric_form_diff",
    "anticommutator", "commutator", "sample_points",
]

SYM_TOL = 1e-10


# ---------------------------------------------------------------------------
# shift operators

class _Coef:
    """Cached matrix-valued sequence k -> A(k) with an optional window."""

    __slots__ = ("fn", "n", "window", "_cache")

    def __init__(self, fn, n, window=(None, None)):
        self.fn = fn
        self.n = n
        self.window = window
        self._cache = {}

    def __call__(self, k):
        k = int(k)
        v = self._cache.get(k)
        if v is not None:
            return v
        lo, hi = self.window
        if (lo is not None and k < lo) or (hi is not None and k > hi):
            raise DomainError(f"k={k} outside the declared window [{lo}, {hi}]")
        v = self.fn(k)
        if isinstance(v, ScalarExpr):
            v = v(float(k))
        v = np.asarray(v, dtype=float)
        if v.ndim == 0:
            v = float(v) * np.eye(self.n)
        if v.shape != (self.n, self.n):
            raise ShapeError(f"coefficient has shape {v.shape}, expected {(self.n, self.n)}")
        if not np.all(np.isfinite(v)):
            raise DomainError(f"coefficient is not finite at k={k}")
        v.setflags(write=False)
        self._cache[k] = v
        return v


def _as_coef(c, n, window):
    if isinstance(c, _Coef):
        return c
    if isinstance(c, ScalarExpr):
        return _Coef(lambda k, c=c: c(float(k)), n, window)
    if isinstance(c, MatrixExpr):
        return _Coef(lambda k, c=c: c(float(k)), n, window)
    if callable(c):
        return _Coef(c, n, window)
    m = np.asarray(c, dtype=float)
    if m.ndim == 0:
        m = float(m) * np.eye(n)
    return _Coef(lambda k, m=m: m, n, (None, None))


def _meet(w1, w2):
    lo = [v for v in (w1[0], w2[0]) if v is not None]
    hi = [v for v in (w1[1], w2[1]) if v is not None]
    return (max(lo) if lo else None, min(hi) if hi else None)


class ShiftOperator:
    """Banded difference operator ``sum_j A_j(k) S^j`` with N x N coefficients.

    Parameters
    ----------
    n : int
        Matrix size.
    coeffs : dict
        Maps the shift ``j`` to a coefficient: a constant matrix or scalar,
        a ScalarExpr in ``k`` (times the identity), a MatrixExpr in ``k``, or a
        callable ``k -> matrix``.
    window : (int or None, int or None)
        Range of ``k`` on which the coefficients are meaningful.  Leaf
        coefficients raise DomainError outside it.
    """

    def __init__(self, n: int, coeffs=None, window=(None, None), name=None):
        self.n = int(n)
        self.window = tuple(window)
        self.name = name
        self.coeffs = {}
        for j, c in (coeffs or {}).items():
            self.coeffs[int(j)] = _as_coef(c, self.n, self.window)

    # -- constructors ----------------------------------------------------
    @classmethod
    def identity(cls, n):
        return cls(n, {0: np.eye(n)})

    @classmethod
    def shift(cls, n, j=1):
        return cls(n, {j: np.eye(n)})

    @classmethod
    def multiplication(cls, n, fn, window=(None, None)):
        """Multiplication by a sequence ``k -> fn(k)``."""
        return cls(n, {0: fn}, window=window)

    # -- evaluation ------------------------------------------------------
    def coef(self, j, k):
        c = self.coeffs.get(int(j))
        if c is None:
            return np.zeros((self.n, self.n))
        return c(k)

    def apply(self, F, k):
        """Return ``(L.F)(k)``; ``F(k)`` may carry leading batch axes."""
        out = None
        for j, c in sorted(self.coeffs.items()):
            a = c(k)
            if not a.any():
                continue
            fk = np.asarray(F(k + j), dtype=float)
            if fk.shape[-2] != self.n:
                raise ShapeError(f"operand has {fk.shape[-2]} rows, operator size is {self.n}")
            t = a @ fk
            out = t if out is None else out + t
        if out is None:
            fk = np.asarray(F(k), dtype=float)
            return np.zeros(fk.shape)
        return out

    def sample_ks(self, lo=-20, hi=20):
        a, b = self.window
        a = lo if a is None else max(a, lo)
        b = hi if b is None else min(b, hi)
        return range(a, b + 1)

    # -- algebra ---------------------------------------------------------
    def _check(self, other):
        if other.n != self.n:
            raise ShapeError(f"shift operators of sizes {self.n} and {other.n}")

    def compose(self, other: "ShiftOperator") -> "ShiftOperator":
        """Operator product ``self o other`` (apply ``other`` first)."""
        self._check(other)
        groups = {}
        for i in self.coeffs:
            for j in other.coeffs:
                groups.setdefault(i + j, []).append((i, j))
        A, B = self.coeffs, other.coeffs
        n = self.n

        def make(pairs):
            def fn(k):
                s = np.zeros((n, n))
                for i, j in pairs:
                    a = A[i](k)
                    if a.any():
                        s = s + a @ B[j](k + i)
                return s
            return fn

        out = ShiftOperator(n, window=_meet(self.window, other.window))
        out.coeffs = {s: _Coef(make(p), n) for s, p in groups.items()}
        return out

    def adjoint(self) -> "ShiftOperator":
        """Formal adjoint ``sum_j A_j(k-j)^T S^{-j}``."""
        out = ShiftOperator(self.n, window=self.window)
        lo, hi = self.window
        zero = np.zeros((self.n, self.n))

        def make(c, j):
            def fn(k):
                # coefficients indexed outside the window act on vanishing entries
                m = k - j
                if (lo is not None and m < lo) or (hi is not None and m > hi):
                    return zero
                return c(m).T
            return fn

        out.coeffs = {-j: _Coef(make(c, j), self.n) for j, c in self.coeffs.items()}
        return out

    def __add__(self, other):
        if not isinstance(other, ShiftOperator):
            other = ShiftOperator(self.n, {0: other})
        self._check(other)
        keys = set(self.coeffs) | set(other.coeffs)
        out = ShiftOperator(self.n, window=_meet(self.window, other.window))
        out.coeffs = {j: _Coef(lambda k, j=j: self.coef(j, k) + other.coef(j, k), self.n)
                      for j in keys}
        return out

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        if not isinstance(other, ShiftOperator):
            other = ShiftOperator(self.n, {0: other})
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        out = ShiftOperator(self.n, window=self.window)
        m = np.asarray(c, dtype=float)
        if m.ndim == 0:
            out.coeffs = {j: _Coef(lambda k, cc=cc: float(m) * cc(k), self.n) for j, cc in self.coeffs.items()}
        else:
            out.coeffs = {j: _Coef(lambda k, cc=cc: m @ cc(k), self.n) for j, cc in self.coeffs.items()}
        return out

    def __mul__(self, other):
        if isinstance(other, ShiftOperator):
            return self.compose(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    __matmul__ = compose

    def __pow__(self, p: int):
        out = ShiftOperator.identity(self.n)
        out.window = self.window
        for _ in range(int(p)):
            out = out.compose(self)
        return out

    # -- numeric structure ----------------------------------------------
    def band_radius(self, ks=None, tol=0.0) -> int:
        ks = self.sample_ks() if ks is None else ks
        r = 0
        for j, c in self.coeffs.items():
            if abs(j) <= r:
                continue
            for k in ks:
                try:
                    v = c(k)
                except DomainError:
                    continue
                if np.max(np.abs(v), initial=0.0) > tol:
                    r = abs(j)
                    break
        return r

    def bandwidth(self, ks=None, tol=0.0) -> int:
        """Twice the band radius (even-valued convention)."""
        return 2 * self.band_radius(ks, tol)

    def trimmed(self, ks=None, tol=0.0) -> "ShiftOperator":
        """Drop shifts whose coefficients vanish at the sampled ``k``."""
        ks = list(self.sample_ks() if ks is None else ks)
        out = ShiftOperator(self.n, window=self.window, name=self.name)
        for j, c in self.coeffs.items():
            keep = False
            for k in ks:
                try:
                    if np.max(np.abs(c(k)), initial=0.0) > tol:
                        keep = True
                        break
                except DomainError:
                    continue
            if keep:
                out.coeffs[j] = c
        return out

    def max_difference(self, other, ks=None) -> float:
        """Largest coefficient discrepancy over the sampled ``k``."""
        ks = list(self.sample_ks() if ks is None else ks)
        d = 0.0
        for j in set(self.coeffs) | set(other.coeffs):
            for k in ks:
                try:
                    a = self.coef(j, k)
                    b = other.coef(j, k)
                except DomainError:
                    continue
                d = max(d, float(np.max(np.abs(a - b))))
        return d

    def coefficient_scale(self, ks=None) -> float:
        ks = list(self.sample_ks() if ks is None else ks)
        s = 0.0
        for j, c in self.coeffs.items():
            for k in ks:
                try:
                    s = max(s, float(np.max(np.abs(c(k)))))
                except DomainError:
                    continue
        return s

    def is_symmetric(self, ks=None, tol=SYM_TOL) -> bool:
        scale = max(self.coefficient_scale(ks), 1e-300)
        return self.max_difference(self.adjoint(), ks) <= tol * scale

    def matrix(self, k0: int, k1: int) -> np.ndarray:
        """Dense block matrix of the section acting on ``k0..k1``.

        Block ``(m, m+j)`` holds ``A_j(m)``; couplings leaving the range are
        dropped.
        """
        n = self.n
        size = k1 - k0 + 1
        out = np.zeros((size * n, size * n))
        for m in range(k0, k1 + 1):
            for j, c in self.coeffs.items():
                col = m + j
                if col < k0 or col > k1:
                    continue
                a = c(m)
                r = (m - k0) * n
                q = (col - k0) * n
                out[r : r + n, q : q + n] = a
        return out

    def __repr__(self):
        return f"ShiftOperator(n={self.n}, shifts={sorted(self.coeffs)})"


def shift_apply(L: ShiftOperator, F, k: int):
    return L.apply(F, k)


def shift_compose(L1: ShiftOperator, L2: ShiftOperator) -> ShiftOperator:
    return L1.compose(L2)


def shift_adjoint(L: ShiftOperator) -> ShiftOperator:
    return L.adjoint()


# ---------------------------------------------------------------------------
# differential operators

def sample_points(domain, count=50, seed=0):
    """Deterministic interior sample points for an interval."""
    lo, hi = domain
    rng = np.random.default_rng(seed)
    if np.isfinite(lo) and np.isfinite(hi):
        a, b = lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo)
    elif np.isfinite(lo):
        a, b = lo + 0.1, lo + 4.0
    elif np.isfinite(hi):
        a, b = hi - 4.0, hi - 0.1
    else:
        a, b = -2.0, 2.0
    return np.sort(rng.uniform(a, b, count))


def _as_matrix_expr(c, n):
    if isinstance(c, MatrixExpr):
        if c.n != n:
            raise ShapeError(f"coefficient of size {c.n}, operator size {n}")
        return c
    if isinstance(c, np.ndarray) and c.ndim == 2:
        return MatrixExpr.constant(c)
    return MatrixExpr.scalar(as_expr(c), n)


class DifferentialOperator:
    """Right-acting differential operator ``sum_n d^n B_n(x)``.

    Parameters
    ----------
    n : int
        Matrix size.
    coeffs : sequence
        ``B_0, ..., B_m``; each a MatrixExpr, a constant matrix, or a scalar
        (number or ScalarExpr) times the identity.
    domain : (float, float)
        Interval on which the coefficients are smooth.
    """

    def __init__(self, n: int, coeffs=(), domain=(-np.inf, np.inf), name=None):
        self.n = int(n)
        self.domain = (float(domain[0]), float(domain[1]))
        self.name = name
        cs = [_as_matrix_expr(c, self.n) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def identity(cls, n, domain=(-np.inf, np.inf)):
        return cls(n, [1.0], domain)

    @classmethod
    def d(cls, n, domain=(-np.inf, np.inf)):
        return cls(n, [0.0, 1.0], domain)

    @classmethod
    def multiplication(cls, f, n, domain=(-np.inf, np.inf)):
        return cls(n, [f], domain)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i) -> MatrixExpr:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return MatrixExpr(self.n)

    # -- action ----------------------------------------------------------
    def apply(self, F: MatrixExpr) -> MatrixExpr:
        """Symbolic right action ``F.D`` on a MatrixExpr."""
        out = MatrixExpr(self.n)
        for i, b in enumerate(self.coeffs):
            out = out + F.diff(i) @ b
        return out

    def apply_jets(self, Fj, x, s: int = 0):
        """Right action on derivative data.

        Parameters
        ----------
        Fj : ndarray, shape (d+1, *x.shape, R, N)
            Derivatives of ``F`` of orders ``0..d`` at ``x``; ``d >= m + s``.
        s : int
            Number of derivatives of the result to return.

        Returns
        -------
        ndarray, shape (s+1, *x.shape, R, N)
        """
        Fj = np.asarray(Fj, dtype=float)
        m = self.order
        if Fj.shape[0] - 1 < m + s:
            raise ContractError(f"need derivatives to order {m + s}, got {Fj.shape[0] - 1}")
        x = np.asarray(x, dtype=float)
        out = np.zeros((s + 1,) + Fj.shape[1:])
        for nn, b in enumerate(self.coeffs):
            bj = b.derivs(x, s)
            for r in range(s + 1):
                for i in range(r + 1):
                    out[r] += comb(r, i) * (Fj[nn + r - i] @ bj[i])
        return out

    # -- algebra ---------------------------------------------------------
    def _check(self, other):
        if other.n != self.n:
            raise ShapeError(f"differential operators of sizes {self.n} and {other.n}")

    def _coerce(self, other):
        if isinstance(other, DifferentialOperator):
            self._check(other)
            return other
        return DifferentialOperator(self.n, [other], self.domain)

    def compose(self, other: "DifferentialOperator") -> "DifferentialOperator":
        """Product in action order: ``F.(self o other) = (F.self).other``."""
        other = self._coerce(other)
        m1, m2 = self.order, other.order
        if m1 < 0 or m2 < 0:
            return DifferentialOperator(self.n, [], self.domain)
        out = [MatrixExpr(self.n) for _ in range(m1 + m2 + 1)]
        for i, b in enumerate(self.coeffs):
            for j, c in enumerate(other.coeffs):
                if c.is_zero():
                    continue
                for l in range(j + 1):
                    out[i + l] = out[i + l] + (b.diff(j - l) @ c) * float(comb(j, l))
        return DifferentialOperator(self.n, out, self.domain)

    def adjoint(self) -> "DifferentialOperator":
        """Formal adjoint ``sum (-1)^n B_n^T d^n`` in right-normal form."""
        m = self.order
        out = [MatrixExpr(self.n) for _ in range(max(m, 0) + 1)]
        for nn, b in enumerate(self.coeffs):
            bt = b.T * float((-1) ** nn)
            for j in range(nn + 1):
                out[j] = out[j] + bt.diff(nn - j) * float(comb(nn, j))
        return DifferentialOperator(self.n, out, self.domain)

    def __add__(self, other):
        other = self._coerce(other)
        m = max(len(self.coeffs), len(other.coeffs))
        return DifferentialOperator(self.n, [self.coeff(i) + other.coeff(i) for i in range(m)], self.domain)

    __radd__ = __add__

    def __neg__(self):
        return DifferentialOperator(self.n, [-c for c in self.coeffs], self.domain)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, DifferentialOperator):
            return self.compose(other)
        if isinstance(other, (Real, np.floating)):
            return DifferentialOperator(self.n, [c * float(other) for c in self.coeffs], self.domain)
        return self.compose(self._coerce(other))

    def __rmul__(self, other):
        return self._coerce(other).compose(self)

    __matmul__ = compose

    def __pow__(self, p: int):
        out = DifferentialOperator.identity(self.n, self.domain)
        for _ in range(int(p)):
            out = out.compose(self)
        return out

    # -- numeric structure ----------------------------------------------
    def coefficient_values(self, xs):
        """Array of shape ``(m+1, len(xs), N, N)``."""
        xs = np.asarray(xs, dtype=float)
        if not self.coeffs:
            return np.zeros((0, xs.size, self.n, self.n))
        return np.stack([c(xs) for c in self.coeffs])

    def max_difference(self, other, xs=None) -> float:
        xs = sample_points(self.domain) if xs is None else xs
        a = self.coefficient_values(xs)
        b = other.coefficient_values(xs)
        m = max(a.shape[0], b.shape[0])
        pa = np.zeros((m,) + a.shape[1:] if a.size else (m, len(xs), self.n, self.n))
        pb = np.zeros_like(pa)
        pa[: a.shape[0]] = a
        pb[: b.shape[0]] = b
        return float(np.max(np.abs(pa - pb), initial=0.0))

    def coefficient_scale(self, xs=None) -> float:
        xs = sample_points(self.domain) if xs is None else xs
        return float(np.max(np.abs(self.coefficient_values(xs)), initial=0.0))

    def trimmed(self, xs=None, tol=1e-12) -> "DifferentialOperator":
        """Drop top coefficients that vanish numerically (relative ``tol``)."""
        xs = sample_points(self.domain) if xs is None else xs
        scale = max(self.coefficient_scale(xs), 1e-300)
        cs = list(self.coeffs)
        while cs and np.max(np.abs(cs[-1](xs))) <= tol * scale:
            cs.pop()
        return DifferentialOperator(self.n, cs, self.domain, self.name)

    def is_symmetric(self, xs=None, tol=SYM_TOL) -> bool:
        scale = max(self.coefficient_scale(xs), 1e-300)
        return self.max_difference(self.adjoint(), xs) <= tol * scale

    def __repr__(self):
        return f"DifferentialOperator(n={self.n}, order={self.order})"


def diff_apply_right(D: DifferentialOperator, F, x=None, s: int = 0):
    """Right action; ``F`` is a MatrixExpr or derivative data at ``x``."""
    if isinstance(F, MatrixExpr):
        return D.apply(F)
    return D.apply_jets(F, x, s)


def diff_compose(D1: DifferentialOperator, D2: DifferentialOperator) -> DifferentialOperator:
    return D1.compose(D2)


def diff_adjoint(D: DifferentialOperator) -> DifferentialOperator:
    return D.adjoint()


# ---------------------------------------------------------------------------
# symmetric canonical forms

def symmetric_form_shift(L: ShiftOperator, ks=None, tol=SYM_TOL):
    """Split a formally symmetric shift operator into symmetric and skew parts.

    Returns ``(A, B)`` with ``A[i]`` and ``B[j]`` callables of ``k`` so that
    ``L = A_0 + sum_i (A_i(k-i) S^-i + A_i(k) S^i) + sum_j (B_j(k-j) S^-j - B_j(k) S^j)``.
    ``A[0]`` is the diagonal; ``B[0]`` is unused and set to ``None``.
    """
    if not L.is_symmetric(ks, tol):
        raise ContractError("shift operator is not formally symmetric")
    ell = L.band_radius(ks)
    A = [lambda k: L.coef(0, k)]
    B = [None]
    for i in range(1, ell + 1):
        A.append(lambda k, i=i: 0.5 * (L.coef(i, k) + L.coef(i, k).T))
        B.append(lambda k, i=i: -0.5 * (L.coef(i, k) - L.coef(i, k).T))
    return A, B


def shift_from_symmetric_form(n, A, B, window=(None, None)) -> ShiftOperator:
    """Inverse of :func:`symmetric_form_shift`."""
    coeffs = {0: A[0]}
    for i in range(1, len(A)):
        a, b = A[i], B[i] if i < len(B) else None
        if b is None:
            coeffs[i] = a
            coeffs[-i] = lambda k, a=a, i=i: a(k - i)
        else:
            coeffs[i] = lambda k, a=a, b=b: a(k) - b(k)
            coeffs[-i] = lambda k, a=a, b=b, i=i: a(k - i) + b(k - i)
    return ShiftOperator(n, coeffs, window)


def _sandwich(A: MatrixExpr, i: int, domain):
    """``d^i A d^i``."""
    n = A.n
    di = DifferentialOperator(n, [0.0] * i + [1.0], domain)
    return di.compose(DifferentialOperator(n, [A], domain)).compose(di)


def _anti_d(B: MatrixExpr, p: int, domain):
    """``{d^p, B}``."""
    n = B.n
    dp = DifferentialOperator(n, [0.0] * p + [1.0], domain)
    b = DifferentialOperator(n, [B], domain)
    return dp.compose(b) + b.compose(dp)


def symmetric_form_diff(D: DifferentialOperator, xs=None, tol=SYM_TOL):
    """Canonical form of a formally symmetric differential operator.

    Returns ``(A, B)`` lists of MatrixExpr with
    ``D = sum_i d^i A_i d^i + sum_{i>=1} {d^(2i-1), B_i}``, ``A_i`` symmetric and
    ``B_i`` skew.  ``B[0]`` is ``None``.
    """
    xs = sample_points(D.domain) if xs is None else xs
    if not D.is_symmetric(xs, tol):
        raise ContractError("differential operator is not formally symmetric")
    n = D.n
    scale = max(D.coefficient_scale(xs), 1e-300)
    m = (D.order + 1) // 2
    A = [MatrixExpr(n) for _ in range(m + 1)]
    B = [None] + [MatrixExpr(n) for _ in range(m)]
    rest = D
    for i in range(m, 0, -1):
        top = rest.coeff(2 * i)
        if top.terms and np.max(np.abs(top(xs))) > tol * scale:
            A[i] = 0.5 * (top + top.T)
            rest = (rest - _sandwich(A[i], i, D.domain)).trimmed(xs, tol)
        else:
            rest = DifferentialOperator(n, rest.coeffs[: 2 * i], D.domain)
        odd = rest.coeff(2 * i - 1)
        if odd.terms and np.max(np.abs(odd(xs))) > tol * scale:
            B[i] = 0.25 * (odd - odd.T)
            rest = (rest - _anti_d(B[i], 2 * i - 1, D.domain)).trimmed(xs, tol)
        else:
            rest = DifferentialOperator(n, rest.coeffs[: 2 * i - 1], D.domain)
    c0 = rest.coeff(0)
    A[0] = 0.5 * (c0 + c0.T)
    return A, B


def diff_from_symmetric_form(A, B, domain=(-np.inf, np.inf)) -> DifferentialOperator:
    n = A[0].n
    out = DifferentialOperator(n, [], domain)
    for i, a in enumerate(A):
        out = out + _sandwich(a, i, domain)
    for i in range(1, len(B)):
        if B[i] is not None:
            out = out + _anti_d(B[i], 2 * i - 1, domain)
    return out


def anticommutator(X, Y):
    return X.compose(Y) + Y.compose(X)


def commutator(X, Y):
    return X.compose(Y) - Y.compose(X)


# ---------------------------------------------------------------------------

class FourierPair:
    """A shift operator and the differential operator it maps to.

    ``L . Psi = Psi . D``.  Products follow the generalized Fourier map, which
    sends the shift product ``L1 L2`` to the action-order product ``D1 D2``.
    """

    def __init__(self, L: ShiftOperator, D: DifferentialOperator, label=None):
        self.L = L
        self.D = D
        self.label = label

    def __mul__(self, other):
        if isinstance(other, FourierPair):
            return FourierPair(self.L.compose(other.L), self.D.compose(other.D))
        return FourierPair(self.L * float(other), self.D * float(other))

    __rmul__ = __mul__

    def __add__(self, other):
        return FourierPair(self.L + other.L, self.D + other.D)

    def __sub__(self, other):
        return FourierPair(self.L - other.L, self.D - other.D)

    def __neg__(self):
        return FourierPair(-self.L, -self.D)

    def adjoint(self):
        return FourierPair(self.L.adjoint(), self.D.adjoint())

    def symmetrized(self):
        """``X + X*`` on both sides."""
        return FourierPair(self.L + self.L.adjoint(), self.D + self.D.adjoint())


def x_operator(n, domain=(-np.inf, np.inf)) -> DifferentialOperator:
    return DifferentialOperator(n, [var()], domain)


def constant_operator(c, n, domain=(-np.inf, np.inf)) -> DifferentialOperator:
    return DifferentialOperator(n, [const(c)], domain)
