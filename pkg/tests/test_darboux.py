import math

import numpy as np
import pytest
from scipy import integrate

from dcprolate.darboux import (
    hermite_matrix_darboux, hermite_matrix_recurrence, laguerre_darboux, laguerre_darboux_basis,
    laguerre_darboux_c_vector, soliton_basis, soliton_family, verify_darboux_identities,
)
from dcprolate.errors import ConstructionError
from dcprolate.expr import cosh, sech, sinh, var
from dcprolate.families import hermite, pair_defect
from dcprolate.kernels import orthonormality_defect
from dcprolate.operators import DifferentialOperator
from dcprolate.solver import SymmetricPairBasis, bifiltration_rank

x = var()


# -- Laguerre transformation ---------------------------------------------------

@pytest.fixture(scope="module")
def lag():
    return laguerre_darboux(0.5, -2.0)


def test_laguerre_identities(lag):
    rep = verify_darboux_identities(lag)
    assert rep.ok, rep.defects
    assert rep.defects["Q q^-2 Q* = (D+lam)(D+lam-1)"] < 1e-8
    assert rep.defects["P* p^-2 P = q(L)^2"] < 1e-8
    assert rep.defects["dual presentations"] < 1e-8


def test_laguerre_P_coefficients(lag):
    beta = math.sqrt((-2.0 + 0.5) / -2.0)
    assert lag.beta == pytest.approx(beta)
    for k in range(0, 10):
        want = -beta * (k + 2.0) * math.sqrt((k + 1) * (k + 1.5))
        assert lag.P.coef(1, k)[0, 0] == pytest.approx(want, rel=1e-14)
    # P is the shift preimage of Q
    from dcprolate.operators import FourierPair
    assert pair_defect(lag.base, FourierPair(lag.P, lag.Q), range(0, 12), np.linspace(0.2, 8, 15)) < 1e-10


def test_laguerre_p_and_q(lag):
    for k in range(6):
        assert lag.p(k) ** 2 == pytest.approx((-2.0 - k) * (-3.0 - k))
    xs = np.linspace(0.1, 20, 50)
    assert np.all(lag.q(xs) < 0) or np.all(lag.q(xs) > 0)


def test_laguerre_transformed_orthonormal(lag):
    assert orthonormality_defect(lag, range(0, 8)) < 1e-7


@pytest.mark.parametrize("a,lam", [(0.5, 1.0), (-2.0, -3.0), (0.5, 3.5), (3.0, -2.0)])
def test_laguerre_parameter_errors(a, lam):
    with pytest.raises(ConstructionError):
        laguerre_darboux(a, lam)


def test_laguerre_a_zero_regular():
    fam = laguerre_darboux(0.0, -1.5)
    assert verify_darboux_identities(fam).ok


def test_laguerre_basis_rank(lag):
    els = laguerre_darboux_basis(lag)
    assert [e.tag for e in els] == ["1"] + [f"R{j}" for j in range(1, 8)]
    xs = np.linspace(0.4, 5.0, 12)
    for e in els:
        assert pair_defect(lag, e.pair, range(0, 8), xs) < 1e-8
    basis = SymmetricPairBasis(els, 4, 4, lag)
    assert bifiltration_rank(basis, 4, 4, xs=xs) == 8


def test_c_vector_leading_entries():
    c = laguerre_darboux_c_vector(0.5, -2.0, 6, 1.0)
    assert np.allclose(c[:3], [1.0, -2.0, 1.0])
    assert c[6] == 0.0


# -- 2r x 2r Hermite transformation -------------------------------------------------

MATRICES = {"r1": [[1.0]], "r2": [[1.0, 0.3], [0.3, 2.0]], "zero": [[0.0]]}


@pytest.mark.parametrize("key", sorted(MATRICES))
def test_matrix_identities(key):
    fam = hermite_matrix_darboux(MATRICES[key])
    rep = verify_darboux_identities(fam)
    assert rep.ok, rep.defects
    assert rep.defects["U U* = blockdiag(-D+A^2, -D+A^2+2)"] < 1e-9
    assert rep.defects["P* F^-T F^-1 P = I"] < 1e-8


@pytest.mark.parametrize("key", sorted(MATRICES))
def test_matrix_orthonormality(key):
    fam = hermite_matrix_darboux(MATRICES[key])
    assert orthonormality_defect(fam, range(0, 9)) < 1e-7


def test_H1_closed_form():
    A = np.array(MATRICES["r2"])
    fam = hermite_matrix_darboux(A)
    H1 = hermite_matrix_recurrence(fam)["H1"]
    for k in range(0, 6):
        Bk = [np.linalg.cholesky(2 * j * np.eye(2) + A @ A) for j in (k, k + 1, k + 2)]
        top = np.linalg.solve(Bk[1], Bk[2])
        bot = Bk[0].T @ np.linalg.inv(Bk[1].T)
        want = math.sqrt((k + 1) / 2) * np.block([[top, np.zeros((2, 2))], [np.zeros((2, 2)), bot]])
        assert np.allclose(H1(k), want, atol=1e-14)


def test_matrix_recurrence_random_points():
    fam = hermite_matrix_darboux(MATRICES["r2"])
    X = fam.fourier_x()
    rng = np.random.default_rng(7)
    for _ in range(20):
        k = int(rng.integers(0, 15))
        xv = np.array([rng.uniform(-3, 3)])
        tab = {j: fam.psi_derivs([j], xv, 0)[0, 0] for j in range(max(k - 1, 0), k + 2)}
        lhs = xv[:, None, None] * tab[k]
        rhs = X.apply(lambda j: tab.get(j, np.zeros_like(tab[k])), k)
        assert np.max(np.abs(lhs - rhs)) < 1e-8 * max(1.0, np.max(np.abs(lhs)))


def test_zero_matrix_decouples():
    fam = hermite_matrix_darboux([[0.0]])
    H0 = hermite_matrix_recurrence(fam)["H0"]
    for k in range(1, 8):
        assert not H0(k).any()
    xs = np.linspace(-2.5, 2.5, 9)
    psi = hermite().scalar_derivs(9, xs, 0)[:, 0]
    for k in range(1, 7):
        v = fam.psi_derivs([k], xs, 0)[0, 0]
        assert np.allclose(v[:, 0, 0], 0.0) and np.allclose(v[:, 1, 1], 0.0)
        assert np.allclose(v[:, 0, 1], -psi[k + 1], atol=1e-14)
        assert np.allclose(v[:, 1, 0], psi[k - 1], atol=1e-14)
    v0 = fam.psi_derivs([0], xs, 0)[0, 0]
    assert np.allclose(v0[:, 1, 1], -psi[0], atol=1e-14)


def test_matrix_construction_errors():
    with pytest.raises(ConstructionError):
        hermite_matrix_darboux([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ConstructionError):
        hermite_matrix_darboux([[1.0, 1.0], [1.0, 1.0]])


# -- soliton family -------------------------------------------------------------------

def test_soliton_identities():
    fam = soliton_family(3, 1)
    rep = verify_darboux_identities(fam)
    assert rep.ok, rep.defects
    assert rep.defects["Schrodinger"] < 1e-8
    assert rep.defects["difference equation"] < 1e-8


@pytest.mark.parametrize("nsol", [1, 2, 3, 4])
def test_soliton_unit_norms_scipy(nsol):
    fam = soliton_family(nsol, 1)
    for k in range(1, nsol + 1):
        f = lambda s: fam.psi_derivs([k], np.array([s]), 0)[0, 0, 0, 0, 0] ** 2
        val, _ = integrate.quad(f, -np.inf, np.inf, limit=200)
        assert val == pytest.approx(1.0, abs=1e-8)


def test_soliton_smooth_through_origin():
    fam = soliton_family(3, 1)
    xs = np.array([-1e-8, 0.0, 1e-8])
    v = fam.psi_derivs([1, 2, 3], xs, 2)
    assert np.all(np.isfinite(v))
    assert np.allclose(v[:, :, 0], v[:, :, 2], atol=1e-6)


def test_soliton_anticommutator_image():
    fam = soliton_family(3, 1)
    el = soliton_basis(fam)[3]
    NN = 12
    want = DifferentialOperator(1, [2 * sinh(x) + 4 * NN * sinh(x) * sech(x) ** 2, 4 * cosh(x), 4 * sinh(x)])
    xs = np.linspace(-3, 3, 13)
    assert el.pair.D.max_difference(want, xs) < 1e-12 * want.coefficient_scale(xs)
    assert pair_defect(fam, el.pair, range(1, 4), xs) < 1e-8


@pytest.mark.parametrize("nsol,p", [(0, 1), (3, 0), (3, 4)])
def test_soliton_errors(nsol, p):
    with pytest.raises(ConstructionError):
        soliton_family(nsol, p)
