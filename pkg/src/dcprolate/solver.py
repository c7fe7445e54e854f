"""Commuting operators from concomitant-vanishing conditions.

A basis of formally bisymmetric Fourier pairs ``(L_i, R_i)`` is generated for
a family.  A combination ``sum c_i (L_i, R_i)`` commutes with the band-limited
integral operators when

* the shift operator has no coupling across the edges of the index window, and
* the continuous concomitant of the differential operator vanishes at the
  finite end(s) of the integration interval.

Both are linear in ``c``; the solution is read off an SVD null space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .concomitants import concomitant_matrix
from .errors import ConstructionError, SolverError
from .expr import MatrixExpr, var
from .families import BispectralTriple
from .operators import (
    DifferentialOperator, FourierPair, ShiftOperator, _Coef, anticommutator,
    sample_points,
)

__all__ = [
    "BasisElement", "SymmetricPairBasis", "CommutingReport", "Problem",
    "build_symmetric_basis", "solve_commuting", "classical_closed_form",
    "bifiltration_rank", "linear_combination", "compare_up_to_scale",
    "problem_for", "symmetrized_word_basis", "monomial_bisymmetric_dimension",
    "in_solution_span", "null_space_operators", "reduce_to_radius", "constraint_matrix",
    "classical_window_basis", "basis_coefficients", "darboux_commuting_order4",
    "matrix_commuting_order2",
]

NULL_TOL = 1e-10


@dataclass
class BasisElement:
    pair: FourierPair
    tag: str
    order: int
    radius: int
    constant: bool = False


@dataclass
class SymmetricPairBasis:
    elements: list
    bw_bound: int
    ord_bound: int
    family: object = None

    def __len__(self):
        return len(self.elements)

    @property
    def tags(self):
        return [e.tag for e in self.elements]


@dataclass
class Problem:
    """Band-limiting data: index window and integration interval."""

    ks: list
    x0: float
    x1: float
    k_edges: list  # (k, upper?) pairs
    x_edges: list  # finite interval ends where the concomitant must vanish

    @property
    def n(self):
        return self.ks[-1]


@dataclass
class CommutingReport:
    family: str
    params: dict
    n: int
    t: float
    tags: list
    coefficients: np.ndarray
    R: DifferentialOperator
    L: ShiftOperator
    nullity: int
    residuals: dict = field(default_factory=dict)
    defects: dict = field(default_factory=dict)
    status: str = "pass"
    problem: Problem = None
    positive_order_nullity: int = 0
    null_space: list = field(default_factory=list, repr=False)

    def coefficient_dict(self):
        return {t: float(c) for t, c in zip(self.tags, self.coefficients)}


# ---------------------------------------------------------------------------
# helpers

def linear_combination(coeffs, ops):
    """``sum c_i op_i`` for shift or differential operators, flattened."""
    ops = list(ops)
    coeffs = [float(c) for c in coeffs]
    if isinstance(ops[0], ShiftOperator):
        n = ops[0].n
        keys = sorted(set().union(*[set(o.coeffs) for o in ops]))
        out = ShiftOperator(n, window=ops[0].window)
        live = [(c, o) for c, o in zip(coeffs, ops) if c != 0.0]

        def make(j):
            def fn(k):
                s = np.zeros((n, n))
                for c, o in live:
                    if j in o.coeffs:
                        s = s + c * o.coeffs[j](k)
                return s
            return fn

        out.coeffs = {j: _Coef(make(j), n) for j in keys}
        return out
    n = ops[0].n
    m = max(o.order for o in ops)
    cs = []
    for i in range(m + 1):
        acc = MatrixExpr(n)
        for c, o in zip(coeffs, ops):
            if c != 0.0 and i <= o.order:
                acc = acc + o.coeffs[i] * c
        cs.append(acc)
    return DifferentialOperator(n, cs, ops[0].domain)


def compare_up_to_scale(R, C, xs):
    """Best scalar ``s`` and ``max |s R - C| / max |C|`` over coefficient samples."""
    a = R.coefficient_values(xs)
    b = C.coefficient_values(xs)
    m = max(a.shape[0], b.shape[0])
    pa = np.zeros((m,) + b.shape[1:])
    pb = np.zeros_like(pa)
    pa[: a.shape[0]] = a
    pb[: b.shape[0]] = b
    s = float(np.sum(pa * pb) / np.sum(pa * pa))
    err = float(np.max(np.abs(s * pa - pb)) / np.max(np.abs(pb)))
    return s, err


# ---------------------------------------------------------------------------
# classical families

def _classical_pairs(fam: BispectralTriple):
    n = fam.n
    X = fam.x_op()
    lam = fam.lam_op
    Lp = FourierPair(fam.L, X, "L")
    Dp = FourierPair(lam, fam.D, "lambda")
    An = FourierPair(anticommutator(fam.L, lam), anticommutator(fam.D, X), "{L,lambda}")
    one = FourierPair(ShiftOperator.identity(n), DifferentialOperator.identity(n, fam.support), "1")
    return [
        BasisElement(one, "1", 0, 0, True),
        BasisElement(Dp, "lambda", 2, 0),
        BasisElement(Lp, "L", 0, 1),
        BasisElement(An, "{L,lambda}", 2, 1),
    ]


def symmetrized_word_basis(fam, words, N=None):
    """Pairs ``A W + W* A^T`` for matrix units ``A`` and Fourier-pair words ``W``.

    ``words`` are FourierPair objects of the scalar family tensored with
    ``I_N``; the result spans the bisymmetric part of their matrix span.
    """
    N = fam.n if N is None else N
    out = []
    for w in words:
        ws = w.adjoint()
        for i in range(N):
            for j in range(N):
                E = np.zeros((N, N))
                E[i, j] = 1.0
                Ls = w.L.scale(E) + ws.L.scale(E.T)
                Ds = DifferentialOperator(N, [E], w.D.domain).compose(w.D) + \
                    ws.D.compose(DifferentialOperator(N, [E.T], w.D.domain))
                out.append(BasisElement(FourierPair(Ls, Ds, f"{w.label}[{i},{j}]"),
                                        f"{w.label}[{i},{j}]", w.D.order, 0))
    return out


def build_symmetric_basis(fam, bw_bound=2, ord_bound=2, **kw) -> SymmetricPairBasis:
    """Bisymmetric Fourier pairs of the family within the bounds."""
    from . import darboux

    if isinstance(fam, darboux.LaguerreDarboux):
        els = darboux.laguerre_darboux_basis(fam)
    elif isinstance(fam, darboux.HermiteMatrixDarboux):
        els = darboux.hermite_matrix_basis(fam)
    elif isinstance(fam, darboux.SolitonFamily):
        els = darboux.soliton_basis(fam)
    elif isinstance(fam, BispectralTriple):
        els = _classical_pairs(fam)
    else:
        raise ConstructionError(f"no basis generator for {type(fam).__name__}")
    els = [e for e in els if e.order <= ord_bound and 2 * e.radius <= bw_bound]
    return SymmetricPairBasis(els, bw_bound, ord_bound, fam)


def classical_closed_form(name, n, t, a=None, b=None, N=1, alt_sign=False) -> DifferentialOperator:
    """Closed-form commuting operator of a classical family.

    ``R = d 2(x-t) p d + p' + 2(x-t) q - (lambda(n) + lambda(n+1)) x``.  The
    Laguerre row can also be produced with the opposite sign of the
    ``(x - t)`` term (``alt_sign``), which does not commute.
    """
    x = var()
    name = name.lower()
    if name == "hermite":
        dom = (-math.inf, math.inf)
        c0 = 2 * (x - t) * (1 - x ** 2) + 2 * (2 * n + 1) * x
        cs = [c0, 2.0, 2 * (x - t)]
    elif name == "laguerre":
        dom = (0.0, math.inf)
        inner = 1 - (a - x) ** 2 * (x ** -1) / 2
        sign = -1.0 if alt_sign else 1.0
        c0 = 1 + sign * (x - t) * inner + (2 * n + 1) * x
        # d 2x(x-t) d = 2x(x-t) d^2 + (4x - 2t) d
        cs = [c0, 4 * x - 2 * t, 2 * x * (x - t)]
    elif name == "jacobi":
        dom = (-1.0, 1.0)
        qj = a * a / 2 * (x - 1) ** -1 - b * b / 2 * (x + 1) ** -1 + (a + b) * (a + b + 2) / 4
        c0 = -2 * x + 2 * (x - t) * qj + (2 * (n + 1) ** 2 + (a + b) * (2 * n + 1)) * x
        pr = 2 * (1 - x ** 2) * (x - t)
        cs = [c0, pr.diff(), pr]
    else:
        raise ConstructionError(f"no closed form for family {name!r}")
    return DifferentialOperator(N, cs, dom)


# ---------------------------------------------------------------------------
# constraint assembly

def problem_for(fam, n, t) -> Problem:
    from . import darboux

    if isinstance(fam, darboux.SolitonFamily):
        ks = list(range(fam.p, fam.nsol + 1))
        return Problem(ks, float(t), math.inf, [(ks[-1], True), (ks[0], False)], [float(t)])
    lo, hi = fam.support
    if not (lo < t < hi):
        raise ConstructionError(f"t={t} must lie inside the support ({lo}, {hi})")
    if int(n) < 0:
        raise ConstructionError(f"n must be >= 0, got {n}")
    ks = list(range(0, int(n) + 1))
    return Problem(ks, lo, float(t), [(ks[-1], True), (ks[0], False)], [float(t)])


def _element_constraints(e: BasisElement, prob: Problem, radius: int, order: int):
    L, R = e.pair.L, e.pair.D
    N = L.n
    disc = []
    for k, upper in prob.k_edges:
        for j in range(1, radius + 1):
            qs = range(k - j + 1, k + 1) if upper else range(k, k + j)
            s = j if upper else -j
            for q in qs:
                disc.append(L.coef(s, q).ravel() if s in L.coeffs else np.zeros(N * N))
    cont = []
    for xe in prob.x_edges:
        M = np.zeros((order, order, N, N))
        if R.order > 0:
            Mi = concomitant_matrix(R, np.asarray(xe))
            M[: Mi.shape[0], : Mi.shape[1]] = Mi
        cont.append(M.ravel())
    d = np.concatenate(disc) if disc else np.zeros(0)
    c = np.concatenate(cont) if cont else np.zeros(0)
    return d, c


def constraint_matrix(elements, prob: Problem):
    radius = max(e.radius for e in elements)
    order = max(max(e.order for e in elements), 1)
    cols_d, cols_c = [], []
    for e in elements:
        d, c = _element_constraints(e, prob, radius, order)
        cols_d.append(d)
        cols_c.append(c)
    Dm = np.array(cols_d).T if cols_d and cols_d[0].size else np.zeros((0, len(elements)))
    Cm = np.array(cols_c).T if cols_c and cols_c[0].size else np.zeros((0, len(elements)))
    return Dm, Cm


def _element_scale(e: BasisElement, prob: Problem):
    lo = max(prob.x0, prob.x1 - 4.0) if math.isfinite(prob.x1) else prob.x0
    hi = prob.x1 if math.isfinite(prob.x1) else prob.x0 + 4.0
    xs = np.linspace(lo, hi, 9)[1:-1]
    ks = [k for k in prob.ks]
    s1 = e.pair.D.coefficient_scale(xs)
    s2 = e.pair.L.coefficient_scale(ks)
    return max(s1, s2, 1e-300)


def null_space(A, tol=NULL_TOL):
    if A.shape[0] == 0:
        return np.eye(A.shape[1]), np.zeros(0)
    u, s, vt = np.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * max(smax, 1e-300)))
    return vt[rank:].T, s


def _solve_subset(elements, prob, tol):
    Dm, Cm = constraint_matrix(elements, prob)
    scales = np.array([_element_scale(e, prob) for e in elements])
    blocks = []
    for B in (Dm, Cm):
        if B.size:
            Bs = B / scales
            mx = np.max(np.abs(Bs))
            if mx > 0:
                blocks.append(Bs / mx)
    A = np.vstack(blocks) if blocks else np.zeros((0, len(elements)))
    V, s = null_space(A, tol)
    return V / scales[:, None], (Dm, Cm), s


def _high_order_samples(R_list, xs):
    """Sampled coefficients of order >= 1 for each operator (columns)."""
    order = max(R.order for R in R_list)
    cols = []
    for R in R_list:
        v = np.zeros((max(order, 0), len(xs), R.n, R.n))
        if R.order >= 1:
            v[: R.order] = R.coefficient_values(xs)[1:]
        cols.append(v.ravel())
    return np.array(cols).T


def solve_commuting(fam, n, t, basis: SymmetricPairBasis = None, tol=NULL_TOL) -> CommutingReport:
    """Minimal-order bisymmetric pair of positive order with vanishing concomitants.

    Bounds on the order are tried in increasing order.  Inside the null space
    at a bound, solutions of order zero (constants and multiplications) are
    split off, and the direction carrying the most positive-order content is
    reported.
    """
    prob = problem_for(fam, n, t)
    basis = build_symmetric_basis(fam, 8, 8) if basis is None else basis
    nonconst = [e for e in basis.elements if not e.constant]
    if not nonconst:
        raise SolverError("basis has no nonconstant elements")
    xs = _reference_points(prob)
    for bound in sorted(set(e.order for e in nonconst)):
        subset = [e for e in nonconst if e.order <= bound]
        V, (Dm, Cm), s = _solve_subset(subset, prob, tol)
        if V.shape[1] == 0:
            continue
        Rs = [e.pair.D for e in subset]
        H = _high_order_samples(Rs, xs)
        if not H.size:
            continue
        HV = H @ V
        u, sv, vt = np.linalg.svd(HV, full_matrices=False)
        if not sv.size or sv[0] <= 1e-9 * max(np.max(np.abs(H)), 1e-300) * np.max(np.abs(V)):
            continue
        positive = int(np.sum(sv > 1e-8 * sv[0]))
        c = V @ vt[0]
        R = linear_combination(c, Rs).trimmed(xs, 1e-9)
        # normalise: leading coefficient at a reference point has max entry +1
        lead = R.coeffs[-1](np.asarray(xs[len(xs) // 2]))
        idx = int(np.argmax(np.abs(lead)))
        c = c / float(lead.flat[idx])
        R = linear_combination(c, Rs).trimmed(xs, 1e-9)
        L = linear_combination(c, [e.pair.L for e in subset])
        res = {
            "discrete_edges": float(np.max(np.abs(Dm @ c), initial=0.0)),
            "continuous_edges": float(np.max(np.abs(Cm @ c), initial=0.0)),
        }
        full = np.zeros(len(basis.elements))
        for e, ci in zip(subset, c):
            full[basis.elements.index(e)] = ci
        rep = CommutingReport(
            fam.name, dict(getattr(fam, "params", {})), int(n), float(t), basis.tags, full,
            R, L, int(V.shape[1]), res, problem=prob,
        )
        rep.positive_order_nullity = positive
        rep.null_space = [(subset, V[:, i]) for i in range(V.shape[1])]
        return rep
    raise SolverError(
        "no nonconstant operator satisfies the concomitant conditions within the "
        f"bounds (bandwidth {basis.bw_bound}, order {basis.ord_bound}); increase the bounds"
    )


def null_space_operators(rep: CommutingReport):
    """Differential operators spanning the solution space of a report."""
    return [linear_combination(v, [e.pair.D for e in subset]) for subset, v in rep.null_space]


def in_solution_span(rep: CommutingReport, C: DifferentialOperator, xs=None):
    """Relative residual of the least-squares fit of ``C`` by the solution space."""
    xs = _reference_points(rep.problem) if xs is None else xs
    ops = null_space_operators(rep)
    m = max([o.order for o in ops] + [C.order])

    def samples(R):
        v = np.zeros((m + 1, len(xs), R.n, R.n))
        if R.order >= 0:
            v[: R.order + 1] = R.coefficient_values(xs)
        return v.ravel()

    M = np.array([samples(o) for o in ops]).T
    b = samples(C)
    coef, *_ = np.linalg.lstsq(M, b, rcond=None)
    return float(np.max(np.abs(M @ coef - b)) / np.max(np.abs(b)))


def _cosine(u, v):
    return float(abs(np.dot(u, v)) / max(np.linalg.norm(u) * np.linalg.norm(v), 1e-300))


def basis_coefficients(elements, C: DifferentialOperator, xs):
    """Least-squares coefficients of ``C`` in the differential members of ``elements``.

    Returns ``(coefficients, relative residual)``.
    """
    ops = [e.pair.D for e in elements]
    m = max([max(o.order, 0) for o in ops] + [C.order])

    def samples(R):
        v = np.zeros((m + 1, len(xs), R.n, R.n))
        if R.order >= 0:
            v[: R.order + 1] = R.coefficient_values(xs)
        return v.ravel()

    M = np.array([samples(o) for o in ops]).T
    b = samples(C)
    coef, *_ = np.linalg.lstsq(M, b, rcond=None)
    return coef, float(np.max(np.abs(M @ coef - b)) / np.max(np.abs(b)))


def darboux_commuting_order4(fam, n, t, basis: SymmetricPairBasis = None) -> CommutingReport:
    """Order-4 commuting operator of the Laguerre Darboux family.

    The solved coefficients on ``R_1 .. R_7`` are compared with the closed
    form at window ``n`` (``cosine_closed_form``) and at ``n + 1``
    (``cosine_closed_form_next``); the constraint residual of the
    closed-form vector itself is recorded as well.
    """
    from .darboux import laguerre_darboux_c_vector

    basis = build_symmetric_basis(fam, 8, 8) if basis is None else basis
    rep = solve_commuting(fam, n, t, basis)
    cd = rep.coefficient_dict()
    tags = [f"R{i}" for i in range(1, 8)]
    c = np.array([cd[g] for g in tags])
    a, lam = fam.params["a"], fam.params["lambda"]
    ref = laguerre_darboux_c_vector(a, lam, n, t)
    nxt = laguerre_darboux_c_vector(a, lam, n + 1, t)
    els = [basis.elements[basis.tags.index(g)] for g in tags]
    A = np.vstack(constraint_matrix(els, rep.problem))
    # scale-free: max |A v| over max (|A| |v|)
    resid = lambda v: float(np.max(np.abs(A @ v)) / max(np.max(np.abs(A) @ np.abs(v)), 1e-300))
    rep.defects.update({
        "cosine_closed_form": _cosine(c, ref),
        "cosine_closed_form_next": _cosine(c, nxt),
        "closed_form_constraint_residual": resid(ref),
    })
    return rep


def matrix_commuting_order2(fam, n, t, basis: SymmetricPairBasis = None) -> CommutingReport:
    """Second-order commuting operator of the matrix Hermite transformation.

    The solution space is computed and the closed form is reported, in
    expanded right-normal form, with its coefficients in the basis.  The
    fit residual against the solution space is ``closed_form_in_span``.
    """
    from .darboux import matrix_closed_form, matrix_closed_form_expanded

    basis = build_symmetric_basis(fam, 8, 8) if basis is None else basis
    rep = solve_commuting(fam, n, t, basis)
    xs = _reference_points(rep.problem)
    C, CL = matrix_closed_form(fam, n, t)
    E = matrix_closed_form_expanded(fam, n, t)
    coef, fit = basis_coefficients(basis.elements, E, xs)
    Dm, Cm = constraint_matrix(basis.elements, rep.problem)
    rep.defects.update({
        "closed_form_in_span": in_solution_span(rep, E, xs),
        "closed_form_basis_fit": fit,
        "closed_vs_expanded": C.max_difference(E, xs) / max(E.coefficient_scale(xs), 1e-300),
    })
    rep.residuals = {
        "discrete_edges": float(np.max(np.abs(Dm @ coef), initial=0.0)),
        "continuous_edges": float(np.max(np.abs(Cm @ coef), initial=0.0)),
    }
    rep.coefficients, rep.R, rep.L = coef, E, CL
    return rep


def reduce_to_radius(elements, max_radius, ks, tag="W"):
    """Combinations of ``elements`` whose shift coefficients beyond ``max_radius`` vanish.

    The excess coefficients are sampled on ``ks``; the null space of the
    sampled matrix gives the combinations, returned as new BasisElements.
    """
    cols = []
    for e in elements:
        L = e.pair.L
        N = L.n
        part = []
        for j in sorted(L.coeffs):
            if abs(j) > max_radius:
                for k in ks:
                    part.append((j, k, L.coef(j, k).ravel()))
        cols.append(part)
    keys = sorted({(j, k) for part in cols for j, k, _ in part})
    N = elements[0].pair.L.n
    M = np.zeros((len(keys) * N * N, len(elements)))
    index = {key: i for i, key in enumerate(keys)}
    for c, part in enumerate(cols):
        for j, k, v in part:
            i = index[(j, k)]
            M[i * N * N:(i + 1) * N * N, c] = v
    scale = np.maximum(np.max(np.abs(M), axis=0), 1e-300)
    V, _ = null_space(M / scale, 1e-10) if M.size else (np.eye(len(elements)), None)
    V = V / scale[:, None] if M.size else V
    out = []
    for i in range(V.shape[1]):
        v = V[:, i] / np.max(np.abs(V[:, i]))
        v[np.abs(v) < 1e-13] = 0.0
        live = [(c, e) for c, e in zip(v, elements) if c != 0.0]
        L = linear_combination([c for c, _ in live], [e.pair.L for _, e in live])
        L.coeffs = {j: cf for j, cf in L.coeffs.items() if abs(j) <= max_radius}
        R = linear_combination([c for c, _ in live], [e.pair.D for _, e in live])
        order = max(e.order for _, e in live)
        out.append(BasisElement(FourierPair(L, R), f"{tag}{i}", order, max_radius))
    return out


def _reference_points(prob: Problem):
    a = prob.x0 if math.isfinite(prob.x0) else prob.x1 - 4.0
    b = prob.x1 if math.isfinite(prob.x1) else prob.x0 + 4.0
    return np.linspace(a, b, 52)[1:-1]


# ---------------------------------------------------------------------------
# ranks

def _pair_samples(e: BasisElement, ks, xs, radius, order):
    L, R = e.pair.L, e.pair.D
    N = L.n
    parts = []
    for j in range(-radius, radius + 1):
        for k in ks:
            parts.append(L.coef(j, k).ravel() if j in L.coeffs else np.zeros(N * N))
    vals = R.coefficient_values(xs)
    pad = np.zeros((order + 1, len(xs), N, N))
    pad[: vals.shape[0]] = vals
    parts.append(pad.ravel())
    return np.concatenate(parts)


def bifiltration_rank(basis: SymmetricPairBasis, bw_bound=None, ord_bound=None, ks=None, xs=None,
                      tol=1e-8) -> int:
    """Numeric rank of the basis elements inside the window.

    Each pair is sampled on both sides (shift coefficients on ``ks`` and
    differential coefficients on ``xs``); the rank counts real dimensions.
    """
    bw_bound = basis.bw_bound if bw_bound is None else bw_bound
    ord_bound = basis.ord_bound if ord_bound is None else ord_bound
    els = [e for e in basis.elements if e.order <= ord_bound and 2 * e.radius <= bw_bound]
    if not els:
        return 0
    fam = basis.family
    ks = list(range(0, 12)) if ks is None else ks
    xs = sample_points(fam.support, 12, seed=3) if xs is None else xs
    radius = max(e.radius for e in els)
    order = max(e.order for e in els)
    M = np.array([_pair_samples(e, ks, xs, radius, order) for e in els])
    M = M / np.maximum(np.max(np.abs(M), axis=1, keepdims=True), 1e-300)
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def classical_window_basis(fam: BispectralTriple) -> SymmetricPairBasis:
    """Matrix-valued bisymmetric span in the (2, 2) window of a classical family.

    Words ``1, lambda, L, lambda L`` symmetrised with every matrix unit.
    """
    X = fam.x_op()
    words = [
        FourierPair(ShiftOperator.identity(fam.n), DifferentialOperator.identity(fam.n, fam.support), "1"),
        FourierPair(fam.lam_op, fam.D, "lambda"),
        FourierPair(fam.L, X, "L"),
        FourierPair(fam.lam_op.compose(fam.L), fam.D.compose(X), "lambda L"),
    ]
    els = symmetrized_word_basis(fam, words)
    for e, w in zip(els, [w for w in words for _ in range(fam.n ** 2)]):
        e.radius = max((abs(j) for j in w.L.coeffs), default=0)
    return SymmetricPairBasis(els, 2, 2, fam)


def monomial_bisymmetric_dimension(N: int, ell: int, m: int, ks=None, xs=None, tol=1e-9) -> int:
    """Dimension of the bisymmetric part of the monomial window.

    The window is spanned by ``k^j S^i E`` (``j <= 2m``, ``|i| <= ell``, ``E`` a
    matrix unit), mapped to ``(d x)^j x^i E``.  Formal symmetry on both sides
    is imposed as linear conditions on sampled coefficients; the null-space
    dimension is returned.
    """
    x = var()
    dom = (0.0, math.inf)
    dx = DifferentialOperator(N, [0.0, x], dom)
    Xi = {i: DifferentialOperator(N, [x ** i], dom) for i in range(-ell, ell + 1)}
    Dpow = [DifferentialOperator.identity(N, dom)]
    for _ in range(2 * m):
        Dpow.append(Dpow[-1].compose(dx))
    ks = list(range(-6, 7)) if ks is None else ks
    xs = np.linspace(0.4, 2.5, 11) if xs is None else xs
    cols = []
    for j in range(2 * m + 1):
        for i in range(-ell, ell + 1):
            for a in range(N):
                for b in range(N):
                    E = np.zeros((N, N))
                    E[a, b] = 1.0
                    L = ShiftOperator(N, {i: lambda k, j=j, E=E: (float(k) ** j) * E})
                    R = Dpow[j].compose(Xi[i]).compose(DifferentialOperator(N, [E], dom))
                    cols.append((L, R))
    rows = []
    for L, R in cols:
        La = L.adjoint()
        Ra = R.adjoint()
        part = []
        for s in range(-ell, ell + 1):
            for k in ks:
                part.append((L.coef(s, k) - La.coef(s, k)).ravel())
        vals = R.coefficient_values(xs)
        vala = Ra.coefficient_values(xs)
        mm = max(vals.shape[0], vala.shape[0], 2 * m + 1)
        pv = np.zeros((mm,) + vals.shape[1:])
        pa = np.zeros_like(pv)
        pv[: vals.shape[0]] = vals
        pa[: vala.shape[0]] = vala
        part.append((pv - pa).ravel())
        rows.append(np.concatenate(part))
    A = np.array(rows).T
    A = A / np.maximum(np.max(np.abs(A), axis=0, keepdims=True), 1e-300)
    s = np.linalg.svd(A, compute_uv=False)
    rank = int(np.sum(s > tol * s[0]))
    return A.shape[1] - rank
