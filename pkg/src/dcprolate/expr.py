"""Scalar and matrix closed-form expressions with exact derivatives.

An expression is stored as a finite sum of terms ``poly(x) * prod_i f_i(x)**e_i``
where the factors ``f_i`` come from a small atom set (exp, sinh, cosh, sech and
real powers of another expression).  Derivatives are produced symbolically by
the product and chain rules, and numerical jets of any order are computed in
Taylor mode, so high derivatives never rely on finite differences.
"""
from __future__ import annotations

import math
from numbers import Real

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DomainError

__all__ = [
    "ScalarExpr", "MatrixExpr", "const", "var", "poly", "exp", "sinh", "cosh",
    "sech", "tanh", "sqrt", "power", "as_expr", "eval", "differentiate",
]


# ---------------------------------------------------------------------------
# truncated power series on arrays of shape (d+1, M)

def _ts_mul(a, b):
    d = a.shape[0] - 1
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for k in range(d + 1):
        out[k] = np.sum(a[: k + 1] * b[k::-1], axis=0)
    return out


def _ts_recip(a):
    if np.any(a[0] == 0.0):
        raise DomainError("division by zero: evaluation point in the zero set of a denominator")
    d = a.shape[0] - 1
    out = np.zeros_like(a)
    out[0] = 1.0 / a[0]
    for k in range(1, d + 1):
        out[k] = -np.sum(a[1 : k + 1] * out[k - 1 :: -1][: k], axis=0) / a[0]
    return out


def _ts_ipow(a, n):
    if n == 0:
        out = np.zeros_like(a)
        out[0] = 1.0
        return out
    if n < 0:
        a = _ts_recip(a)
        n = -n
    result = None
    base = a
    while n:
        if n & 1:
            result = base if result is None else _ts_mul(result, base)
        n >>= 1
        if n:
            base = _ts_mul(base, base)
    return result


def _ts_pow(a, e):
    if float(e).is_integer():
        return _ts_ipow(a, int(e))
    a0 = a[0]
    if np.any(a0 < 0):
        raise DomainError(f"non-integer power {e} of a negative value")
    d = a.shape[0] - 1
    if np.any(a0 == 0):
        if e > 0 and d == 0:
            return np.abs(a) ** e
        raise DomainError(f"power {e} evaluated at a zero of its base")
    out = np.zeros_like(a)
    out[0] = a0 ** e
    for k in range(1, d + 1):
        j = np.arange(1, k + 1)
        w = (e * j - (k - j)).reshape((-1,) + (1,) * (a.ndim - 1))
        out[k] = np.sum(w * a[1 : k + 1] * out[k - 1 :: -1][:k], axis=0) / (k * a0)
    return out


def _ts_exp(u):
    d = u.shape[0] - 1
    out = np.zeros_like(u)
    out[0] = np.exp(u[0])
    for k in range(1, d + 1):
        j = np.arange(1, k + 1).reshape((-1,) + (1,) * (u.ndim - 1))
        out[k] = np.sum(j * u[1 : k + 1] * out[k - 1 :: -1][:k], axis=0) / k
    return out


def _ts_sinhcosh(u, scaled=False):
    """Series of ``sinh u`` and ``cosh u``; ``scaled`` multiplies both by ``exp(-|u0|)``."""
    d = u.shape[0] - 1
    s = np.zeros_like(u)
    c = np.zeros_like(u)
    if scaled:
        e2 = np.exp(-2.0 * np.abs(u[0]))
        s[0] = np.sign(u[0]) * (1.0 - e2) / 2
        c[0] = (1.0 + e2) / 2
    else:
        s[0] = np.sinh(u[0])
        c[0] = np.cosh(u[0])
    for k in range(1, d + 1):
        j = np.arange(1, k + 1).reshape((-1,) + (1,) * (u.ndim - 1))
        ju = j * u[1 : k + 1]
        s[k] = np.sum(ju * c[k - 1 :: -1][:k], axis=0) / k
        c[k] = np.sum(ju * s[k - 1 :: -1][:k], axis=0) / k
    return s, c


def _poly_taylor(coef, x, d):
    out = np.zeros((d + 1,) + x.shape)
    c = np.asarray(coef, dtype=float)
    fact = 1.0
    for j in range(d + 1):
        if c.size == 0:
            break
        out[j] = npoly.polyval(x, c) / fact
        c = npoly.polyder(c)
        fact *= j + 1
    return out


def _trim(c):
    c = np.asarray(c, dtype=float)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return np.zeros(0)
    return c[: nz[-1] + 1].copy()


# ---------------------------------------------------------------------------
# atoms

class _Atom:
    """A non-polynomial factor; ``key`` identifies it structurally."""

    key: str

    def taylor(self, x, d):
        raise NotImplementedError

    def derivative(self) -> "ScalarExpr":
        raise NotImplementedError


class _ExpAtom(_Atom):
    def __init__(self, arg):
        self.arg = arg
        self.key = f"exp({arg.key})"

    def taylor(self, x, d):
        return _ts_exp(self.arg.taylor(x, d))

    def derivative(self):
        return ScalarExpr._atom(self) * self.arg.diff()


class _HypAtom(_Atom):
    def __init__(self, kind, arg):
        self.kind = kind
        self.arg = arg
        self.key = f"{kind}({arg.key})"

    def taylor(self, x, d):
        u = self.arg.taylor(x, d)
        if self.kind in ("sinh", "cosh"):
            s, c = _ts_sinhcosh(u)
            return s if self.kind == "sinh" else c
        # sech and tanh from scaled series, finite for any |u|
        s, c = _ts_sinhcosh(u, scaled=True)
        rc = _ts_recip(c)
        if self.kind == "tanh":
            return _ts_mul(s, rc)
        return rc * np.exp(-np.abs(u[0]))

    def derivative(self):
        du = self.arg.diff()
        if self.kind == "sinh":
            return cosh(self.arg) * du
        if self.kind == "cosh":
            return sinh(self.arg) * du
        if self.kind == "tanh":
            return sech(self.arg) ** 2 * du
        return -(tanh(self.arg) * sech(self.arg)) * du


class _BaseAtom(_Atom):
    """A general expression used as the base of a real power."""

    def __init__(self, base):
        self.base = base
        self.key = f"[{base.key}]"

    def taylor(self, x, d):
        return self.base.taylor(x, d)

    def derivative(self):
        return self.base.diff()


# ---------------------------------------------------------------------------

def _fmt(v):
    return repr(float(v))


class ScalarExpr:
    """Closed-form scalar function of one real variable.

    Build expressions from :func:`var`, :func:`const`, :func:`poly` and the
    atom constructors, and combine them with ``+ - * / **``.  Instances are
    immutable.

    Examples
    --------
    >>> x = var()
    >>> f = (1 - x**2) * exp(-x**2 / 2)
    >>> float(f.diff()(0.0))
    0.0
    """

    __slots__ = ("_terms", "_key", "_diff", "__weakref__")

    def __init__(self, terms=()):
        # terms: dict factor-key -> (poly coef array, tuple of (atom, exponent))
        merged = {}
        for c, factors in terms:
            c = _trim(c)
            if c.size == 0:
                continue
            fkey = _factor_key(factors)
            if fkey in merged:
                old = merged[fkey][0]
                n = max(old.size, c.size)
                s = np.zeros(n)
                s[: old.size] += old
                s[: c.size] += c
                s = _trim(s)
                if s.size == 0:
                    del merged[fkey]
                else:
                    merged[fkey] = (s, factors)
            else:
                merged[fkey] = (c, factors)
        self._terms = tuple(merged[k] for k in sorted(merged))
        self._key = None
        self._diff = None

    # -- construction helpers -------------------------------------------
    @staticmethod
    def _atom(atom, e=1.0):
        return ScalarExpr([(np.ones(1), ((atom, float(e)),))])

    @property
    def key(self) -> str:
        if self._key is None:
            parts = []
            for c, factors in self._terms:
                parts.append("(" + ",".join(_fmt(v) for v in c) + ")" + _factor_key(factors))
            self._key = "+".join(parts) if parts else "0"
        return self._key

    @property
    def terms(self):
        return self._terms

    def is_zero(self) -> bool:
        return len(self._terms) == 0

    def constant_value(self):
        """Return the value if the expression is a constant, else ``None``."""
        if not self._terms:
            return 0.0
        if len(self._terms) == 1:
            c, f = self._terms[0]
            if not f and c.size == 1:
                return float(c[0])
        return None

    def poly_coefficients(self):
        """Ascending coefficients if the expression is a polynomial, else ``None``."""
        if not self._terms:
            return np.zeros(1)
        if len(self._terms) == 1 and not self._terms[0][1]:
            return self._terms[0][0].copy()
        return None

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = as_expr(other)
        if other is NotImplemented:
            return NotImplemented
        return ScalarExpr(self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr([(-c, f) for c, f in self._terms])

    def __sub__(self, other):
        other = as_expr(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = as_expr(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, Real):
            if other == 0:
                return ScalarExpr()
            return ScalarExpr([(c * float(other), f) for c, f in self._terms])
        other = as_expr(other)
        if other is NotImplemented:
            return NotImplemented
        out = []
        for c1, f1 in self._terms:
            for c2, f2 in other._terms:
                c, f = _mul_factors(npoly.polymul(c1, c2), f1, f2)
                out.append((c, f))
        return ScalarExpr(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Real):
            return self * (1.0 / float(other))
        other = as_expr(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other ** -1

    def __rtruediv__(self, other):
        return as_expr(other) * self ** -1

    def __pow__(self, e):
        return power(self, e)

    # -- calculus ---------------------------------------------------------
    def diff(self, n: int = 1) -> "ScalarExpr":
        """Return the ``n``-th derivative."""
        out = self
        for _ in range(n):
            out = out._diff1()
        return out

    def _diff1(self):
        if self._diff is not None:
            return self._diff
        acc = []
        pieces = []
        for c, factors in self._terms:
            dc = npoly.polyder(c) if c.size > 1 else np.zeros(0)
            if dc.size:
                acc.append((dc, factors))
            for i, (atom, e) in enumerate(factors):
                rest = factors[:i] + factors[i + 1 :]
                lead = ScalarExpr([(c * e, rest + ((atom, e - 1.0),))])
                pieces.append(lead * atom.derivative())
        out = ScalarExpr(acc)
        for p in pieces:
            out = out + p
        self._diff = out
        return out

    # -- evaluation -------------------------------------------------------
    def taylor(self, x, d: int):
        """Taylor coefficients ``f^(j)(x)/j!`` for ``j=0..d``, shape ``(d+1,)+x.shape``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros((d + 1,) + x.shape)
        for c, factors in self._terms:
            t = _poly_taylor(c, x, d)
            for atom, e in factors:
                t = _ts_mul(t, _ts_pow(atom.taylor(x, d), e))
            out += t
        return out

    def derivs(self, x, d: int):
        """Derivatives ``f^(j)(x)`` for ``j=0..d``, shape ``(d+1,)+x.shape``."""
        t = self.taylor(x, d)
        for j in range(2, d + 1):
            t[j] *= math.factorial(j)
        return t

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        v = self.taylor(x_arr, 0)[0]
        if not np.all(np.isfinite(v)):
            raise DomainError("non-finite value: evaluation outside the domain")
        return float(v) if v.ndim == 0 else v

    def __repr__(self):
        return f"ScalarExpr({self.key})"


def _factor_key(factors):
    return "*".join(f"{a.key}^{_fmt(e)}" for a, e in factors)


def _mul_factors(c, f1, f2):
    """Merge factor tuples, folding exponentials and positive integer polynomial powers."""
    table = {}
    exp_arg = None
    for atom, e in f1 + f2:
        if isinstance(atom, _ExpAtom):
            a = atom.arg * e
            exp_arg = a if exp_arg is None else exp_arg + a
            continue
        if atom.key in table:
            table[atom.key] = (atom, table[atom.key][1] + e)
        else:
            table[atom.key] = (atom, e)
    out = []
    for k in sorted(table):
        atom, e = table[k]
        if e == 0:
            continue
        if isinstance(atom, _BaseAtom) and e > 0 and float(e).is_integer():
            pc = atom.base.poly_coefficients()
            if pc is not None:
                c = npoly.polymul(c, npoly.polypow(pc, int(e)))
                continue
        out.append((atom, e))
    if exp_arg is not None and not exp_arg.is_zero():
        cv = exp_arg.constant_value()
        if cv is not None:
            c = c * math.exp(cv)
        else:
            out.append((_ExpAtom(exp_arg), 1.0))
            out.sort(key=lambda t: t[0].key)
    return c, tuple(out)


# ---------------------------------------------------------------------------
# public constructors

def as_expr(v):
    """Coerce a real number or ScalarExpr to ScalarExpr."""
    if isinstance(v, ScalarExpr):
        return v
    if isinstance(v, (Real, np.floating, np.integer)):
        return ScalarExpr([(np.array([float(v)]), ())])
    return NotImplemented


def const(c: float) -> ScalarExpr:
    return as_expr(float(c))


def var() -> ScalarExpr:
    """The identity function ``x``."""
    return ScalarExpr([(np.array([0.0, 1.0]), ())])


def poly(coef) -> ScalarExpr:
    """Polynomial with ascending coefficients ``coef``."""
    return ScalarExpr([(np.asarray(coef, dtype=float), ())])


def exp(u) -> ScalarExpr:
    u = as_expr(u)
    cv = u.constant_value()
    if cv is not None:
        return const(math.exp(cv))
    return ScalarExpr._atom(_ExpAtom(u))


def sinh(u) -> ScalarExpr:
    u = as_expr(u)
    cv = u.constant_value()
    if cv is not None:
        return const(math.sinh(cv))
    return ScalarExpr._atom(_HypAtom("sinh", u))


def cosh(u) -> ScalarExpr:
    u = as_expr(u)
    cv = u.constant_value()
    if cv is not None:
        return const(math.cosh(cv))
    return ScalarExpr._atom(_HypAtom("cosh", u))


def sech(u) -> ScalarExpr:
    u = as_expr(u)
    cv = u.constant_value()
    if cv is not None:
        return const(1.0 / math.cosh(cv))
    return ScalarExpr._atom(_HypAtom("sech", u))


def tanh(u) -> ScalarExpr:
    u = as_expr(u)
    cv = u.constant_value()
    if cv is not None:
        return const(math.tanh(cv))
    return ScalarExpr._atom(_HypAtom("tanh", u))


def power(u, e) -> ScalarExpr:
    """``u**e`` for real ``e``; non-integer powers require ``u > 0`` at evaluation."""
    u = as_expr(u)
    e = float(e)
    if e == 0:
        return const(1.0)
    if e == 1:
        return u
    cv = u.constant_value()
    if cv is not None:
        if cv < 0 and not e.is_integer():
            raise DomainError(f"non-integer power {e} of negative constant {cv}")
        if cv == 0 and e < 0:
            raise DomainError("negative power of zero")
        return const(cv ** e)
    if e.is_integer() and e > 0:
        out = const(1.0)
        for _ in range(int(e)):
            out = out * u
        return out
    if e.is_integer() and len(u.terms) == 1:
        # distribute an integer power over a single product term
        c, factors = u.terms[0]
        head = [(np.ones(1), tuple((a, ee * e) for a, ee in factors))]
        pc = poly(c)
        cv = pc.constant_value()
        if cv is not None:
            return ScalarExpr(head) * (cv ** e)
        return ScalarExpr(head) * ScalarExpr._atom(_BaseAtom(pc), e)
    return ScalarExpr._atom(_BaseAtom(u), e)


def sqrt(u) -> ScalarExpr:
    return power(u, 0.5)


def eval(expr: ScalarExpr, x):  # noqa: A001 - mirrors the operation name
    """Evaluate ``expr`` at ``x`` (scalar or array)."""
    return as_expr(expr)(x)


def differentiate(expr: ScalarExpr, n: int = 1) -> ScalarExpr:
    return as_expr(expr).diff(n)


# ---------------------------------------------------------------------------

class MatrixExpr:
    """Square matrix of scalar expressions, stored as ``sum_i f_i(x) M_i``.

    Each constant matrix ``M_i`` is normalised so that its largest entry in
    absolute value is 1, so equal matrix directions share one scalar factor.
    """

    __slots__ = ("n", "_terms", "_diff")

    def __init__(self, n: int, terms=()):
        self.n = int(n)
        acc = {}
        for f, m in terms:
            f = as_expr(f)
            m = np.asarray(m, dtype=float)
            if f.is_zero() or not np.any(m):
                continue
            idx = int(np.argmax(np.abs(m)))
            s = m.flat[idx]
            mh = m / s
            key = mh.tobytes()
            if key in acc:
                acc[key] = (acc[key][0] + f * s, mh)
            else:
                acc[key] = (f * s, mh)
        self._terms = tuple((f, m) for f, m in acc.values() if not f.is_zero())
        self._diff = None

    @classmethod
    def scalar(cls, f, n: int) -> "MatrixExpr":
        return cls(n, [(f, np.eye(n))])

    @classmethod
    def constant(cls, m) -> "MatrixExpr":
        m = np.atleast_2d(np.asarray(m, dtype=float))
        return cls(m.shape[0], [(1.0, m)])

    @classmethod
    def from_entries(cls, entries) -> "MatrixExpr":
        """Build from a nested list of scalars or ScalarExpr."""
        n = len(entries)
        terms = []
        for i in range(n):
            for j in range(n):
                e = np.zeros((n, n))
                e[i, j] = 1.0
                terms.append((as_expr(entries[i][j]), e))
        return cls(n, terms)

    @property
    def terms(self):
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def entry(self, i, j) -> ScalarExpr:
        out = const(0.0)
        for f, m in self._terms:
            if m[i, j] != 0:
                out = out + f * float(m[i, j])
        return out

    def _coerce(self, other):
        if isinstance(other, MatrixExpr):
            if other.n != self.n:
                from .errors import ShapeError
                raise ShapeError(f"matrix sizes {self.n} and {other.n} differ")
            return other
        if isinstance(other, np.ndarray) and other.ndim == 2:
            return MatrixExpr.constant(other)
        return MatrixExpr.scalar(as_expr(other), self.n)

    def __add__(self, other):
        other = self._coerce(other)
        return MatrixExpr(self.n, self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self):
        return MatrixExpr(self.n, [(-f, m) for f, m in self._terms])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (MatrixExpr, np.ndarray)):
            return self @ other
        f = as_expr(other)
        return MatrixExpr(self.n, [(g * f, m) for g, m in self._terms])

    __rmul__ = __mul__

    def __matmul__(self, other):
        other = self._coerce(other)
        return MatrixExpr(self.n, [(f * g, m @ p) for f, m in self._terms for g, p in other._terms])

    def __rmatmul__(self, other):
        return self._coerce(other) @ self

    @property
    def T(self) -> "MatrixExpr":
        return MatrixExpr(self.n, [(f, m.T) for f, m in self._terms])

    def diff(self, n: int = 1) -> "MatrixExpr":
        out = self
        for _ in range(n):
            if out._diff is None:
                out._diff = MatrixExpr(out.n, [(f.diff(), m) for f, m in out._terms])
            out = out._diff
        return out

    def derivs(self, x, d: int):
        """Derivatives of orders ``0..d``; shape ``(d+1,)+x.shape+(n, n)``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros((d + 1,) + x.shape + (self.n, self.n))
        for f, m in self._terms:
            out += f.derivs(x, d)[..., None, None] * m
        return out

    def __call__(self, x):
        return self.derivs(x, 0)[0]

    def __repr__(self):
        return f"MatrixExpr(n={self.n}, terms={len(self._terms)})"
