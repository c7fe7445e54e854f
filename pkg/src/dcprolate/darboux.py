"""Self-adjoint bispectral Darboux transformations and a soliton family.

Three worked families, each with the evaluation interface of
:class:`~dcprolate.families.BispectralTriple` (``psi_derivs``, ``support``,
``n``):

* :func:`laguerre_darboux`: a scalar rank-one transformation of the Laguerre
  family built from a symmetric factorization of ``(D + lam)(D + lam - 1)``.
* :func:`hermite_matrix_darboux`: a ``2r x 2r`` transformation of the Hermite
  family by a Dirac-type first-order operator ``U``.
* :func:`soliton_family`: the reflectionless Schrodinger family with potential
  ``N(N+1) sech^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ConstructionError, DomainError
from .expr import MatrixExpr, ScalarExpr, const, cosh, power, sech, sinh, tanh, var
from .families import BispectralTriple, hermite, laguerre, leibniz, pair_defect
from .operators import (
    DifferentialOperator, FourierPair, ShiftOperator, anticommutator, commutator,
)
from .quadrature import composite_gauss_legendre

__all__ = [
    "TransformedFamily", "LaguerreDarboux", "HermiteMatrixDarboux", "SolitonFamily",
    "laguerre_darboux", "hermite_matrix_darboux", "soliton_family",
    "hermite_matrix_recurrence", "verify_darboux_identities", "DarbouxReport",
    "kron_shift", "kron_diff", "laguerre_darboux_c_vector", "laguerre_darboux_basis",
    "hermite_matrix_basis", "soliton_basis", "soliton_closed_form", "matrix_closed_form", "matrix_closed_form_expanded",
    "hermite_matrix_window_dimension",
]


def kron_shift(C, L: ShiftOperator) -> ShiftOperator:
    """Scalar shift operator times a constant matrix ``C``."""
    C = np.asarray(C, dtype=float)
    out = ShiftOperator(C.shape[0], window=L.window)
    out.coeffs = {}
    from .operators import _Coef
    for j, c in L.coeffs.items():
        out.coeffs[j] = _Coef(lambda k, c=c: float(c(k)[0, 0]) * C, C.shape[0])
    return out


def kron_diff(C, D: DifferentialOperator) -> DifferentialOperator:
    """Scalar differential operator times a constant matrix ``C``."""
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    cs = [MatrixExpr(n, [(c.entry(0, 0), C)]) for c in D.coeffs]
    return DifferentialOperator(n, cs, D.domain)


def _mult(n, f, dom):
    return DifferentialOperator(n, [f], dom)


def _seq(n, fn):
    return ShiftOperator.multiplication(n, fn, window=(0, None))


def _jets_of(expr: ScalarExpr, x, d):
    return expr.derivs(np.asarray(x, dtype=float), d)


# ---------------------------------------------------------------------------

@dataclass(eq=False)
class TransformedFamily:
    """Common data of a Darboux-transformed family.

    ``psi_derivs(ks, x, d)`` returns jets of shape ``(len(ks), d+1, *x.shape, N, N)``
    with zero rows for ``k < kmin``.
    """

    name: str
    n: int
    support: tuple
    params: dict = field(default_factory=dict)
    kmin: int = 0
    singular_ends: tuple = (False, False)

    def _check_x(self, x):
        lo, hi = self.support
        if np.any(x <= lo) or np.any(x >= hi):
            raise DomainError(f"x outside the support ({lo}, {hi})")

    def psi(self, k, x, d=0):
        return self.psi_derivs([k], x, d)[0]

    def psi_derivs(self, ks, x, d=0):  # pragma: no cover - abstract
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Laguerre rank-one transformation

@dataclass(eq=False)
class LaguerreDarboux(TransformedFamily):
    base: BispectralTriple = None
    lam: float = 0.0
    beta: float = 0.0
    q: ScalarExpr = None
    Q: DifferentialOperator = None
    P: ShiftOperator = None
    D_tilde: DifferentialOperator = None
    L_tilde: ShiftOperator = None

    @property
    def a(self):
        return self.params["a"]

    def p(self, k):
        return math.sqrt((self.lam - k) * (self.lam - k - 1))

    def psi_derivs(self, ks, x, d=0):
        """``Psi~ = (Psi.Q) / (p(k) q(x))`` from exact jets of the base family."""
        ks = np.atleast_1d(np.asarray(ks, dtype=int))
        x = np.asarray(x, dtype=float)
        self._check_x(x)
        kk = [int(k) for k in ks if k >= self.kmin]
        out = np.zeros((ks.size, d + 1) + x.shape + (1, 1))
        if not kk:
            return out
        base = self.base.psi_derivs(kk, x, d + 2)
        qi = _jets_of(power(self.q, -1), x, d)[..., None, None]
        j = 0
        for i, k in enumerate(ks):
            if k < self.kmin:
                continue
            pq = self.Q.apply_jets(base[j], x, d)
            out[i] = leibniz(pq, qi) / self.p(int(k))
            j += 1
        return out

    def psi_dual(self, ks, x, d=0):
        """Shift-side presentation ``(P.Psi)(k, x) / (p(k) q(x))``."""
        ks = [int(k) for k in np.atleast_1d(ks)]
        x = np.asarray(x, dtype=float)
        kk = list(range(min(ks) - 1, max(ks) + 2))
        tab = self.base.psi_derivs(kk, x, d)
        look = {k: tab[i] for i, k in enumerate(kk)}
        qi = _jets_of(power(self.q, -1), x, d)[..., None, None]
        out = []
        for k in ks:
            pp = self.P.apply(lambda j: look[j], k)
            out.append(leibniz(pp, qi) / self.p(k))
        return np.stack(out)

    def q_of_L(self) -> ShiftOperator:
        """``q(L)`` with ``L`` the base recurrence operator."""
        c0 = 2 * self.lam + 2 * self.a + self.beta * (2 * self.lam + self.a)
        return self.base.L.scale(-self.beta) + ShiftOperator(1, {0: c0})


def _lag_P0(k, lam, beta, a):
    # 2 lam beta a / (beta - 1) rewritten with a = lam (beta^2 - 1), regular at a = 0
    return (2 * beta * k * (k + 1) - 2 * lam * beta * (beta + 2) * k
            - lam * beta * (beta + 2) + 2 * lam * lam * beta * (beta + 1))


def laguerre_darboux(a: float, lam: float) -> LaguerreDarboux:
    """Rank-one self-adjoint transformation of the Laguerre family.

    Requires ``lam < 0`` and ``lam + a < 0``, which keeps ``p(k)`` and ``beta``
    real for every ``k >= 0`` and ``q`` free of zeros on ``(0, inf)``.
    """
    a = float(a)
    lam = float(lam)
    base = laguerre(a)
    if not (lam < 0 and lam + a < 0):
        bad = [k for k in range(0, int(max(lam, 0)) + 3) if (lam - k) * (lam - k - 1) <= 0]
        msg = (f"laguerre-darboux needs lam < 0 and lam + a < 0 (got a={a}, lam={lam})")
        if bad:
            msg += f"; p(k)^2 <= 0 at k = {bad}"
        elif lam * (lam + a) <= 0:
            msg += "; (lam + a)/lam is not positive"
        else:
            msg += "; q(x) vanishes inside (0, inf)"
        raise ConstructionError(msg)
    beta = math.sqrt((lam + a) / lam)
    x = var()
    dom = (0.0, math.inf)
    q = 2 * lam + 2 * a + beta * (2 * lam + a - x)
    q0 = 2 * lam + 2 * a + beta * (2 * lam + a)
    Q = DifferentialOperator(
        1, [-(x / 4 - (2 * lam + a) / 2 + (a * a / 4) * power(x, -1)) * q, q0, x * q], dom, name="Q")
    P = ShiftOperator(1, {
        1: lambda k: -beta * (k - lam) * math.sqrt((k + 1) * (k + a + 1)),
        -1: lambda k: -beta * (k + 1 - lam) * math.sqrt(k * (k + a)) if k > 0 else 0.0,
        0: lambda k: _lag_P0(k, lam, beta, a),
    }, window=(0, None), name="P")
    fam = LaguerreDarboux("laguerre-darboux", 1, dom, {"a": a, "lambda": lam}, 0, (True, False),
                          base, lam, beta, q, Q, P)
    qi = _mult(1, power(q, -1), dom)
    pinv = _seq(1, lambda k: 1.0 / fam.p(k))
    fam.D_tilde = qi.compose(Q.adjoint()).compose(Q).compose(qi)
    fam.L_tilde = pinv.compose(P).compose(P.adjoint()).compose(pinv)
    return fam


def laguerre_darboux_basis(fam: LaguerreDarboux):
    """The seven bisymmetric pairs ``R_1 .. R_7`` and the identity."""
    from .solver import BasisElement

    dom = fam.support
    x = var()
    base = fam.base
    q, Q, P = fam.q, fam.Q, fam.P
    qi = _mult(1, power(q, -1), dom)
    qm = _mult(1, q, dom)
    Qs = Q.adjoint()
    Ps = P.adjoint()
    pm = _seq(1, fam.p)
    pinv = _seq(1, lambda k: 1.0 / fam.p(k))
    X = _mult(1, x, dom)
    lam_k = base.lam_op
    els = [BasisElement(FourierPair(ShiftOperator.identity(1), DifferentialOperator.identity(1, dom), "1"),
                        "1", 0, 0, True)]
    Xj = DifferentialOperator.identity(1, dom)
    Lj = ShiftOperator.identity(1)
    for j in range(3):
        R = qi.compose(Qs).compose(Xj).compose(Q).compose(qi)
        L = pm.compose(Lj).compose(pm)
        els.append(BasisElement(FourierPair(L, R, f"R{j + 1}"), f"R{j + 1}", 4, j))
        Xj = Xj.compose(X)
        Lj = Lj.compose(base.L)
    Dj = DifferentialOperator.identity(1, dom)
    Aj = ShiftOperator.identity(1)
    for j in range(2):
        R = qm.compose(Dj).compose(qm)
        L = pinv.compose(P).compose(Aj).compose(Ps).compose(pinv)
        els.append(BasisElement(FourierPair(L, R, f"R{j + 4}"), f"R{j + 4}", 2 * j, 2))
        Dj = Dj.compose(base.D)
        Aj = Aj.compose(lam_k)
    # skew generator [x, D] <-> [L, lambda(k)]
    B = commutator(X, base.D)
    A = commutator(base.L, lam_k)
    Bj = DifferentialOperator.identity(1, dom)
    Aj = ShiftOperator.identity(1)
    for j in range(2):
        sgn = (-1.0) ** j
        R = qm.compose(Bj).compose(Q).compose(qi) + qi.compose(Qs).compose(Bj.adjoint()).compose(qm) * sgn
        L = pinv.compose(P).compose(Aj).compose(pm) + pm.compose(Aj.adjoint()).compose(Ps).compose(pinv).scale(sgn)
        els.append(BasisElement(FourierPair(L, R, f"R{j + 6}"), f"R{j + 6}", 2 + 2 * j, 1 + j))
        Bj = Bj.compose(B)
        Aj = Aj.compose(A)
    return els


def laguerre_darboux_c_vector(a, lam, n, t):
    """Closed-form coefficients ``c_1 .. c_7`` of the order-4 commuting operator."""
    beta = math.sqrt((lam + a) / lam)
    # a (beta + 1)/(beta - 1) = lam (beta + 1)^2 since a = lam (beta^2 - 1)
    return np.array([
        t * t, -2 * t, 1.0,
        -lam * (lam - n) * (lam + n - 1) / (lam + a),
        -2 * lam * (lam - n) / (lam + a),
        (lam - n) / beta * (lam * (beta + 1) ** 2 - t),
        0.0,
    ])


# ---------------------------------------------------------------------------
# 2r x 2r Hermite transformation

@dataclass(eq=False)
class HermiteMatrixDarboux(TransformedFamily):
    base: BispectralTriple = None
    A: np.ndarray = None
    r: int = 1
    U: DifferentialOperator = None
    P: ShiftOperator = None
    singular_A: bool = False

    def __post_init__(self):
        self._B = {}
        self._Binv = {}

    def B(self, k):
        """Lower Cholesky factor of ``2k I + A^2``."""
        k = int(k)
        if k not in self._B:
            r = self.r
            M = 2 * k * np.eye(r) + self.A @ self.A
            if k == 0 and self.singular_A:
                self._B[k] = np.zeros((r, r))
            else:
                try:
                    self._B[k] = np.linalg.cholesky(M)
                except np.linalg.LinAlgError as e:
                    raise ConstructionError(f"2kI + A^2 is not positive definite at k={k}") from e
        return self._B[k]

    def Binv(self, k):
        k = int(k)
        if k not in self._Binv:
            if k == 0 and self.singular_A:
                raise DomainError("B_0 is singular for a singular A")
            self._Binv[k] = np.linalg.inv(self.B(k))
        return self._Binv[k]

    def F(self, k):
        r = self.r
        z = np.zeros((r, r))
        return np.block([[z, self.B(k)], [self.B(k + 1), z]])

    def Finv(self, k):
        r = self.r
        z = np.zeros((r, r))
        return np.block([[z, self.Binv(k + 1)], [self.Binv(k), z]])

    def _b0_inv_A(self):
        # limit of B_0^{-1} A as A -> 0+ (r = 1)
        return np.eye(self.r) if self.singular_A else self.Binv(0) @ self.A

    def _blocks(self, k):
        # coefficients of psi(k), psi(k+1), psi(k-1) in Psi~(k)
        r = self.r
        b1 = self.Binv(k + 1)
        top_l = -(b1 @ self.A)
        top_r = -math.sqrt(2 * k + 2) * b1
        if k == 0:
            bot_l = np.zeros((r, r))
            bot_r = -self._b0_inv_A()
        else:
            b0 = self.Binv(k)
            bot_l = math.sqrt(2 * k) * b0
            bot_r = -(b0 @ self.A)
        return top_l, top_r, bot_l, bot_r

    def finv_p(self) -> ShiftOperator:
        """``F(k)^{-1} P(k, S)`` as one operator, regular at ``k = 0`` for ``A = 0``."""
        r = self.r
        z = np.zeros((r, r))

        def part(j):
            def fn(k):
                if k < 0:
                    return np.zeros((2 * r, 2 * r))
                tl, tr, bl, br = self._blocks(int(k))
                if j == 0:
                    return np.block([[tl, z], [z, br]])
                if j == 1:
                    return np.block([[z, tr], [z, z]])
                return np.block([[z, z], [bl, z]])
            return fn

        return ShiftOperator(self.n, {j: part(j) for j in (-1, 0, 1)}, window=(0, None))

    def psi_derivs(self, ks, x, d=0):
        """Block formula in ``psi(k-1)``, ``psi(k)``, ``psi(k+1)``."""
        ks = np.atleast_1d(np.asarray(ks, dtype=int))
        x = np.asarray(x, dtype=float)
        r = self.r
        out = np.zeros((ks.size, d + 1) + x.shape + (2 * r, 2 * r))
        live = [int(k) for k in ks if k >= 0]
        if not live:
            return out
        kk = list(range(max(min(live) - 1, 0), max(live) + 2))
        s = self.base.scalar_derivs(max(kk), x, d)
        look = lambda j: s[j] if j >= 0 else np.zeros_like(s[0])
        for i, k in enumerate(ks):
            k = int(k)
            if k < 0:
                continue
            top_l, top_r, bot_l, bot_r = self._blocks(k)
            pk, pn, pp = look(k), look(k + 1), look(k - 1)
            e = lambda v, m: v[..., None, None] * m
            out[i, ..., :r, :r] = e(pk, top_l)
            out[i, ..., :r, r:] = e(pn, top_r)
            out[i, ..., r:, :r] = e(pp, bot_l)
            out[i, ..., r:, r:] = e(pk, bot_r)
        return out

    def psi_dual(self, ks, x, d=0):
        """Differential-side presentation ``F(k)^{-1} (Psi.U)``."""
        ks = [int(k) for k in np.atleast_1d(ks)]
        x = np.asarray(x, dtype=float)
        N = self.n
        s = self.base.scalar_derivs(max(ks), x, d + 1)
        out = []
        for k in ks:
            jets = s[k][..., None, None] * np.eye(N)
            pu = self.U.apply_jets(jets, x, d)
            out.append(self.Finv(k) @ pu)
        return np.stack(out)

    def psi_shift(self, ks, x, d=0):
        """Shift-side presentation ``F(k)^{-1} (P.Psi)``."""
        ks = [int(k) for k in np.atleast_1d(ks)]
        x = np.asarray(x, dtype=float)
        N = self.n
        s = self.base.scalar_derivs(max(ks) + 1, x, d)
        look = lambda j: s[j][..., None, None] * np.eye(N) if j >= 0 else np.zeros(s[0].shape + (N, N))
        return np.stack([self.Finv(k) @ self.P.apply(look, k) for k in ks])

    def H1(self, k):
        b = lambda j: self.B(j)
        inv = np.linalg.inv
        r = self.r
        z = np.zeros((r, r))
        return math.sqrt((k + 1) / 2) * np.block([
            [inv(b(k + 1)) @ b(k + 2), z],
            [z, b(k).T @ inv(b(k + 1).T)],
        ])

    def H0(self, k):
        r = self.r
        z = np.zeros((r, r))
        if k == 0 and self.singular_A:
            up = np.linalg.inv(self.B(1))  # B_1^{-1} A (B_0^*)^{-1} in the A -> 0+ limit
            return np.block([[z, up], [up.T, z]])
        b0, b1 = self.Binv(k), self.Binv(k + 1)
        return np.block([[z, b1 @ self.A @ b0.T], [b0 @ self.A @ b1.T, z]])

    def fourier_x(self) -> ShiftOperator:
        """``H_1(k) S + H_0(k) + H_1(k-1)^T S^{-1}``: the shift image of ``x``."""
        return ShiftOperator(self.n, {
            1: self.H1, 0: self.H0,
            -1: lambda k: self.H1(k - 1).T if k > 0 else np.zeros((self.n, self.n)),
        }, window=(0, None))

    def sandwich_shift(self, M: ShiftOperator) -> ShiftOperator:
        """``F(k)^T M F(k)``; its Fourier image is ``U* b(M) U``."""
        Ft = _seq(self.n, lambda k: self.F(k).T)
        Fm = _seq(self.n, self.F)
        return Ft.compose(M).compose(Fm)

    def conjugate_shift(self, M: ShiftOperator) -> ShiftOperator:
        """``F^{-1} P M P* F^{-T}``; the preimage of ``b(M)`` for the new family."""
        G = self.finv_p()
        return G.compose(M).compose(G.adjoint())


def hermite_matrix_darboux(A) -> HermiteMatrixDarboux:
    """``2r x 2r`` transformation of ``psi(k, x) I`` by the Dirac-type operator ``U``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    r = A.shape[0]
    if A.shape != (r, r):
        raise ConstructionError(f"A must be square, got shape {A.shape}")
    if not np.allclose(A, A.T, atol=1e-14 * max(1.0, np.max(np.abs(A)))):
        raise ConstructionError("A must be symmetric")
    A = 0.5 * (A + A.T)
    singular = np.linalg.matrix_rank(A) < r
    if singular and r != 1:
        raise ConstructionError("A must be invertible for r > 1 (B_0 B_0^T = A^2 has no invertible factor)")
    N = 2 * r
    x = var()
    dom = (-math.inf, math.inf)
    I = np.eye(r)
    Z = np.zeros((r, r))
    U = DifferentialOperator(N, [
        MatrixExpr(N, [(x, np.block([[I, Z], [Z, -I]])), (1.0, np.block([[Z, -A], [-A, Z]]))]),
        np.eye(N),
    ], dom, name="U")
    P = ShiftOperator(N, {
        -1: lambda k: math.sqrt(2 * k) * np.block([[I, Z], [Z, Z]]) if k > 0 else np.zeros((N, N)),
        0: np.block([[Z, -A], [-A, Z]]),
        1: lambda k: -math.sqrt(2 * k + 2) * np.block([[Z, Z], [Z, I]]),
    }, window=(0, None), name="P")
    params = {"A": A.tolist(), "r": r}
    fam = HermiteMatrixDarboux("hermite-matrix", N, dom, params, 0, (False, False),
                               hermite(1), A, r, U, P, bool(singular))
    fam.B(0)
    return fam


def hermite_matrix_recurrence(fam: HermiteMatrixDarboux):
    """Callables ``H_1(k)`` and ``H_0(k)`` of the three-term recurrence in ``x``."""
    return {"H1": fam.H1, "H0": fam.H0}


def _dirac_pairs(fam: HermiteMatrixDarboux):
    """Scalar Hermite words used to build the matrix basis."""
    base = fam.base
    X = base.x_op()
    lam = base.lam_op
    one = FourierPair(ShiftOperator.identity(1), DifferentialOperator.identity(1, base.support))
    xp = FourierPair(base.L, X)
    x2 = xp * xp
    sym = []
    for j, xj in enumerate([one, xp, x2]):
        sym.append((f"A{j}0", xj * 2.0))
        sym.append((f"A{j}1", FourierPair(anticommutator(xj.L, lam), anticommutator(xj.D, base.D))))
    skew = [(f"B{j}", FourierPair(commutator(xj.L, lam), commutator(xj.D, base.D)))
            for j, xj in ((1, xp), (2, x2))]
    plain_sym = [(f"V{j}", xj) for j, xj in enumerate([one, xp, x2])]
    plain_skew = [(f"W{j}", FourierPair(commutator(xj.L, lam), commutator(xj.D, base.D)))
                  for j, xj in ((1, xp), (2, x2))]
    return sym, skew, plain_sym, plain_skew


def _units(N, symmetric=True):
    out = []
    for i in range(N):
        for j in range(i if symmetric else i + 1, N):
            E = np.zeros((N, N))
            E[i, j] = 1.0
            E = E + E.T if symmetric else E - E.T
            if symmetric and i == j:
                E = E / 2
            out.append(((i, j), E))
    return out


def hermite_matrix_basis(fam: HermiteMatrixDarboux, max_radius=2, ks=None):
    """Bisymmetric pairs ``U*(C w)U`` and ``C w`` for scalar words ``w``.

    Elements whose shift side reaches beyond ``max_radius`` are replaced by the
    combinations in which the excess coefficients vanish.
    """
    from .solver import BasisElement, reduce_to_radius

    N = fam.n
    U = fam.U
    Us = U.adjoint()
    sym, skew, plain_sym, plain_skew = _dirac_pairs(fam)
    els = []
    for words, symmetric in ((sym, True), (skew, False)):
        for tag, w in words:
            for (i, j), C in _units(N, symmetric):
                R = Us.compose(kron_diff(C, w.D)).compose(U)
                L = fam.sandwich_shift(kron_shift(C, w.L))
                rad = max((abs(s) for s in w.L.coeffs), default=0)
                els.append(BasisElement(FourierPair(L, R), f"U*{tag}[{i},{j}]U", R.order, rad))
    extra = []
    for words, symmetric in ((plain_sym, True), (plain_skew, False)):
        for tag, w in words:
            for (i, j), C in _units(N, symmetric):
                R = kron_diff(C, w.D)
                L = fam.conjugate_shift(kron_shift(C, w.L))
                rad = L.band_radius(range(0, 16), 1e-12 * max(L.coefficient_scale(range(0, 16)), 1.0))
                el = BasisElement(FourierPair(L, R), f"{tag}[{i},{j}]", max(R.order, 0), rad)
                (els if rad <= max_radius else extra).append(el)
    if extra:
        ks = list(range(0, 16)) if ks is None else ks
        els.extend(reduce_to_radius(extra, max_radius, ks, "V/W"))
    return els


def matrix_closed_form(fam: HermiteMatrixDarboux, n, t):
    """``U*(t - x)U + x(A^2 + (2n+2)I) I_N`` and its shift-side preimage."""
    N, r = fam.n, fam.r
    base = fam.base
    x = var()
    dom = fam.support
    U = fam.U
    Cmat = np.kron(np.eye(2), fam.A @ fam.A + (2 * n + 2) * np.eye(r))
    R = U.adjoint().compose(DifferentialOperator(N, [t - x], dom)).compose(U) + \
        DifferentialOperator(N, [MatrixExpr(N, [(x, Cmat)])], dom)
    tL = ShiftOperator(1, {0: t}) - base.L
    L = fam.sandwich_shift(kron_shift(np.eye(N), tL)) + fam.conjugate_shift(kron_shift(Cmat, base.L))
    return R, L


def matrix_closed_form_expanded(fam: HermiteMatrixDarboux, n, t):
    """The expanded right-normal form of :func:`matrix_closed_form`."""
    N, r = fam.n, fam.r
    x = var()
    A2 = fam.A @ fam.A
    I = np.eye(r)
    Z = np.zeros((r, r))
    c0 = MatrixExpr(N, [
        (t, np.kron(np.eye(2), A2)),
        ((2 * n + 2) * x + t * x ** 2 - x ** 3, np.eye(N)),
        (t - 2 * x, np.block([[I, Z], [Z, -I]])),
        (1.0, np.block([[Z, fam.A], [fam.A, Z]])),
    ])
    c1 = MatrixExpr(N, [(1.0, np.eye(N))])
    c2 = MatrixExpr(N, [(x - t, np.eye(N))])
    return DifferentialOperator(N, [c0, c1, c2], fam.support)


# ---------------------------------------------------------------------------
# soliton family

@dataclass(eq=False)
class SolitonFamily(TransformedFamily):
    nsol: int = 1
    p: int = 1
    mu: dict = None
    L: ShiftOperator = None
    D: DifferentialOperator = None
    sinh2: DifferentialOperator = None

    def A(self, k):
        """Recurrence coefficient; ``A(0)`` is replaced by 1 (regularised)."""
        N = self.nsol
        if k == 0:
            return 1.0
        if k < 0:
            return 0.0
        v = (N - k) * (k + N + 1) / (k * (k + 1))
        return math.sqrt(v) if v > 0 else 0.0

    def _expr(self, k):
        cache = self.__dict__.setdefault("_exprs", {})
        if k in cache:
            return cache[k]
        N = self.nsol
        # 2F1(-N, N+1; 1+k; z) with z = (1 + tanh x)/2, as a polynomial in tanh
        cz = np.array([special.poch(-N, m) * special.poch(N + 1, m)
                       / (special.poch(1 + k, m) * math.factorial(m)) for m in range(N + 1)])
        ct = np.polynomial.polynomial.Polynomial([0.0])
        half = np.polynomial.polynomial.Polynomial([0.5, 0.5])
        for m, c in enumerate(cz):
            ct = ct + c * half ** m
        th = tanh(var())
        if k >= 1:
            # e^{kx} (1 - tanh)^k = sech^k, so divide the polynomial by (1 - tanh)^k
            quo, rem = divmod(ct, np.polynomial.polynomial.Polynomial([1.0, -1.0]) ** k)
            if np.max(np.abs(rem.coef)) > 1e-10 * np.max(np.abs(ct.coef)):
                raise DomainError(f"soliton mode k={k} is not a bound state")
            e = const(0.0)
            for c in quo.coef[::-1]:
                e = e * th + float(c)
            e = e * sech(var()) ** k
        else:
            e = const(0.0)
            for c in ct.coef[::-1]:
                e = e * th + float(c)
        cache[k] = e
        return e

    def psi_derivs(self, ks, x, d=0):
        ks = np.atleast_1d(np.asarray(ks, dtype=int))
        x = np.asarray(x, dtype=float)
        out = np.zeros((ks.size, d + 1) + x.shape + (1, 1))
        for i, k in enumerate(ks):
            k = int(k)
            m = self.mu.get(k, 0.0)
            if k < 0 or m == 0.0:
                continue
            out[i] = m * self._expr(k).derivs(x, d)[..., None, None]
        return out


def soliton_family(nsol: int, p: int = 1) -> SolitonFamily:
    """Reflectionless family ``Psi(k, x)``, ``k = 1..N``, with unit norms.

    ``Psi(k) = mu(k) sech^k(x) r_k(tanh x)``, which equals
    ``mu(k) e^{kx} 2F1(-N, N+1; 1+k; 1/(1+e^{-2x}))`` without cancellation.
    ``mu(1)`` is fixed by the norm; ``mu(k+1) = -A(k) mu(k)``.  The index 0
    carries the regularised mode ``-mu(1) 2F1(-N, N+1; 1; z)`` so that the
    difference equation holds at ``k = 1`` with ``A(0) = 1``.
    """
    nsol = int(nsol)
    if nsol < 1:
        raise ConstructionError(f"Nsol must be >= 1, got {nsol}")
    p = int(p)
    if not 1 <= p <= nsol:
        raise ConstructionError(f"p must satisfy 1 <= p <= Nsol, got p={p}")
    x = var()
    dom = (-math.inf, math.inf)
    fam = SolitonFamily("soliton", 1, dom, {"nsol": nsol, "p": p}, 0, (False, False), nsol, p, {})
    fam.mu = {1: 1.0}
    span = 40.0 + 2.0 * nsol
    quad = composite_gauss_legendre(-span, span, 400, 12)
    v = fam._expr(1)(quad.nodes)
    fam.mu[1] = 1.0 / math.sqrt(float(quad.integrate(v * v)))
    for k in range(1, nsol):
        fam.mu[k + 1] = -fam.A(k) * fam.mu[k]
    fam.mu[0] = -fam.mu[1]
    NN = nsol * (nsol + 1)
    fam.D = DifferentialOperator(1, [NN * sech(x) ** 2, 0.0, 1.0], dom, name="D")
    fam.sinh2 = DifferentialOperator(1, [2 * sinh(x)], dom)
    fam.L = ShiftOperator(1, {1: fam.A, -1: lambda k: fam.A(k - 1)}, window=(0, None), name="L")
    return fam


def soliton_basis(fam: SolitonFamily):
    from .solver import BasisElement

    ksq = ShiftOperator.multiplication(1, lambda k: float(k * k), window=(0, None))
    one = FourierPair(ShiftOperator.identity(1), DifferentialOperator.identity(1, fam.support), "1")
    return [
        BasisElement(one, "1", 0, 0, True),
        BasisElement(FourierPair(ksq, fam.D, "k^2"), "k^2", 2, 0),
        BasisElement(FourierPair(fam.L, fam.sinh2, "L"), "L", 0, 1),
        BasisElement(FourierPair(anticommutator(ksq, fam.L), anticommutator(fam.D, fam.sinh2), "{k^2,L}"),
                     "{k^2,L}", 2, 1),
    ]


def soliton_closed_form(fam: SolitonFamily, t) -> DifferentialOperator:
    """``d (sinh x - sinh t) d - p(p-1) sinh x + N(N+1)(sinh x - sinh t) sech^2 x``."""
    x = var()
    NN = fam.nsol * (fam.nsol + 1)
    w = sinh(x) - math.sinh(t)
    c0 = -fam.p * (fam.p - 1) * sinh(x) + NN * w * sech(x) ** 2
    return DifferentialOperator(1, [c0, cosh(x), w], fam.support)


# ---------------------------------------------------------------------------
# identity verification

@dataclass
class DarbouxReport:
    family: str
    defects: dict
    tolerance: float
    passed: dict

    @property
    def ok(self):
        return all(self.passed.values())


def _rel(a, b):
    num = float(np.max(np.abs(a - b)))
    den = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    return num / den


def _coef_rel(X, Y, xs):
    s = max(X.coefficient_scale(xs), Y.coefficient_scale(xs), 1e-300)
    return X.max_difference(Y, xs) / s


def _shift_rel(X, Y, ks):
    s = max(X.coefficient_scale(ks), Y.coefficient_scale(ks), 1e-300)
    return X.max_difference(Y, ks) / s


def verify_darboux_identities(fam, ks=None, xs=None, tol=1e-7) -> DarbouxReport:
    """Numeric defects of the defining identities of a transformed family."""
    d = {}
    if isinstance(fam, LaguerreDarboux):
        ks = list(range(0, 8)) if ks is None else ks
        xs = np.linspace(0.2, 6.0, 11) if xs is None else xs
        dom = fam.support
        base = fam.base
        qi = _mult(1, power(fam.q, -1), dom)
        lam = fam.lam
        Iop = DifferentialOperator.identity(1, dom)
        lhs = fam.Q.compose(qi).compose(qi).compose(fam.Q.adjoint())
        rhs = (base.D + Iop * lam).compose(base.D + Iop * (lam - 1))
        d["Q q^-2 Q* = (D+lam)(D+lam-1)"] = _coef_rel(lhs, rhs, xs)
        pinv2 = _seq(1, lambda k: 1.0 / fam.p(k) ** 2)
        qL = fam.q_of_L()
        d["P* p^-2 P = q(L)^2"] = _shift_rel(fam.P.adjoint().compose(pinv2).compose(fam.P),
                                             qL.compose(qL), list(range(0, 14)))
        d["P.Psi = Psi.Q"] = pair_defect(base, FourierPair(fam.P, fam.Q), ks, xs)
        d["dual presentations"] = _rel(fam.psi_derivs(ks, xs, 1), fam.psi_dual(ks, xs, 1))
        psq = _seq(1, lambda k: fam.p(k) ** 2)
        d["Psi~.D~ = p^2 Psi~"] = pair_defect(fam, FourierPair(psq, fam.D_tilde), ks, xs)
        qsq = DifferentialOperator(1, [fam.q * fam.q], dom)
        d["L~.Psi~ = Psi~ q^2"] = pair_defect(fam, FourierPair(fam.L_tilde, qsq), ks, xs)
    elif isinstance(fam, HermiteMatrixDarboux):
        ks = list(range(1 if fam.singular_A else 0, 8)) if ks is None else ks
        xs = np.linspace(-3.0, 3.0, 11) if xs is None else xs
        N, r = fam.n, fam.r
        base = fam.base
        UUs = fam.U.compose(fam.U.adjoint())
        A2 = fam.A @ fam.A
        x = var()
        blk = lambda s: np.kron(np.diag([1.0, 0.0]), np.eye(r)) if s == 0 else np.kron(np.diag([0.0, 1.0]), np.eye(r))
        mD = kron_diff(np.eye(N), base.D) * -1.0
        rhs = mD + DifferentialOperator(N, [MatrixExpr(N, [(1.0, np.kron(np.eye(2), A2)),
                                                           (2.0, blk(1))])], fam.support)
        d["U U* = blockdiag(-D+A^2, -D+A^2+2)"] = _coef_rel(UUs, rhs, xs)
        Fi = _seq(N, fam.Finv)
        FiT = _seq(N, lambda k: fam.Finv(k).T)
        ident = fam.P.adjoint().compose(FiT).compose(Fi).compose(fam.P)
        kw = [k for k in range(1, 14)]
        d["P* F^-T F^-1 P = I"] = _shift_rel(ident, ShiftOperator.identity(N), kw)
        d["F F* = blockdiag"] = max(
            float(np.max(np.abs(fam.F(k) @ fam.F(k).T - np.kron(np.diag([2 * k, 2 * k + 2]), np.eye(r))
                                - np.kron(np.eye(2), A2)))) for k in kw)
        d["P.Psi = Psi.U"] = _rel(fam.psi_shift(ks, xs, 0), fam.psi_dual(ks, xs, 0))
        d["dual presentations"] = _rel(fam.psi_derivs(ks, xs, 1), fam.psi_dual(ks, xs, 1))
        Xs = fam.fourier_x()
        d["x recurrence"] = pair_defect(fam, FourierPair(Xs, DifferentialOperator(N, [x], fam.support)), ks, xs)
        FtF = _seq(N, lambda k: fam.F(k).T @ fam.F(k))
        d["Psi~.U*U = F*F Psi~"] = pair_defect(fam, FourierPair(FtF, fam.U.adjoint().compose(fam.U)), ks, xs)
    elif isinstance(fam, SolitonFamily):
        ks = list(range(1, fam.nsol + 1)) if ks is None else ks
        xs = np.linspace(-4.0, 4.0, 13) if xs is None else xs
        ksq = ShiftOperator.multiplication(1, lambda k: float(k * k), window=(0, None))
        d["Schrodinger"] = pair_defect(fam, FourierPair(ksq, fam.D), ks, xs)
        d["difference equation"] = pair_defect(fam, FourierPair(fam.L, fam.sinh2), ks, xs)
        quad = composite_gauss_legendre(-40.0 - 2 * fam.nsol, 40.0 + 2 * fam.nsol, 300, 10)
        v = fam.psi_derivs(ks, quad.nodes, 0)[:, 0, :, 0, 0]
        d["unit norms"] = float(np.max(np.abs(quad.integrate(v * v, axis=1) - 1.0)))
    else:
        raise ConstructionError(f"no Darboux identities for {type(fam).__name__}")
    passed = {k: bool(v < tol) for k, v in d.items()}
    return DarbouxReport(fam.name, d, tol, passed)


def hermite_matrix_window_dimension(fam: HermiteMatrixDarboux, ell=2, m=2, degree=7, K=40, xs=None,
                                    tol=1e-9, return_matrix=False):
    """Dimension of the bisymmetric window of order ``2m`` and band radius ``ell``.

    Every operator ``R = sum_{i <= 2m, j <= degree} d^i x^j E_ab`` is paired
    with ``F^{-1} P b(R) P^T F^{-T}``, assembled as a block matrix on
    ``k = 0..K`` (exact on rows far from the top).  Symmetry of both members
    and vanishing of the shift coefficients beyond ``ell`` are imposed; the
    null-space dimension is returned.
    """
    N = fam.n
    xs = np.linspace(-2.0, 2.0, 13) if xs is None else xs
    kk = np.arange(K + 1)
    Lm = np.diag(np.sqrt((kk[1:]) / 2.0), 1) + np.diag(np.sqrt(kk[1:] / 2.0), -1)
    Dm = -np.diag(np.sqrt(kk[1:] / 2.0), 1) + np.diag(np.sqrt(kk[1:] / 2.0), -1)
    blocks = lambda f: [[f(a, b) for b in range(K + 1)] for a in range(K + 1)]
    z = np.zeros((N, N))
    Fi = np.block(blocks(lambda a, b: fam.Finv(a) if a == b else z))
    Pm = np.block(blocks(lambda a, b: fam.P.coef(b - a, a) if abs(b - a) <= 1 else z))
    left = Fi @ Pm
    right = left.T
    reach = 2 * m + degree + 2
    rows = range(0, K + 1 - reach)
    units = []
    for a in range(N):
        for b in range(N):
            E = np.zeros((N, N))
            E[a, b] = 1.0
            units.append(E)
    x = var()
    cols, mag_cols = [], []
    Mi = [np.linalg.matrix_power(Dm, i) for i in range(2 * m + 1)]
    Mj = [np.linalg.matrix_power(Lm, j) for j in range(degree + 1)]
    for i in range(2 * m + 1):
        for j in range(degree + 1):
            S = Mi[i] @ Mj[j]
            for E in units:
                X = left @ np.kron(S, E) @ right
                parts, mags = [], []
                for k in rows:
                    for s in range(-reach, reach + 1):
                        if 0 <= k + s <= K:
                            blk = X[k * N:(k + 1) * N, (k + s) * N:(k + s + 1) * N]
                            tr = X[(k + s) * N:(k + s + 1) * N, k * N:(k + 1) * N].T
                            if abs(s) > ell:
                                parts.append(blk.ravel())
                                mags.append(np.abs(blk).ravel())
                            if k + s in rows:
                                parts.append((blk - tr).ravel())
                                mags.append((np.abs(blk) + np.abs(tr)).ravel())
                cs = [MatrixExpr(N) for _ in range(i)] + [MatrixExpr(N, [(x ** j if j else 1.0, E)])]
                R = DifferentialOperator(N, cs, fam.support)
                Ra = R.adjoint()
                vals = np.zeros((2 * m + 1, len(xs), N, N))
                vala = np.zeros_like(vals)
                vals[: R.order + 1] = R.coefficient_values(xs)
                vala[: Ra.order + 1] = Ra.coefficient_values(xs)
                parts.append((vals - vala).ravel())
                mags.append((np.abs(vals) + np.abs(vala)).ravel())
                cols.append(np.concatenate(parts))
                mag_cols.append(np.concatenate(mags))
    M = np.array(cols).T
    # diagonal scalings keep the rank; they are taken from the entry
    # magnitudes before cancellation so rounding noise is uniformly ~eps
    G = np.array(mag_cols).T
    cscale = np.maximum(np.max(G, axis=0), 1e-300)
    G = G / cscale
    rscale = np.maximum(np.max(G, axis=1), 1e-300)
    M = M / cscale / rscale[:, None]
    if return_matrix:
        return M, cscale
    s = np.linalg.svd(M, compute_uv=False)
    return M.shape[1] - int(np.sum(s > tol * s[0]))
