from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from hyperstab.errors import HypothesisViolated, SchemaError
from hyperstab.fixtures import exa, hyper_nsinf, sing
from hyperstab.matpoly import (
    MatrixPolynomial,
    common_isotropic_vector,
    determinant,
    eigenvalues,
    entries_linearly_independent,
    kernel_intersection_singularity,
    norms,
)
from hyperstab.scalarpoly import ComplexPolynomial

from conftest import crandn


def match(a, b) -> float:
    a, b = np.asarray(a, complex), np.asarray(b, complex)
    if a.size != b.size:
        return math.inf
    if a.size == 0:
        return 0.0
    C = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(C)
    return float(C[r, c].max())


def cofactor_det(M):
    """Exact-style cofactor expansion over ComplexPolynomial entries."""
    n = len(M)
    if n == 1:
        return M[0][0]
    out = ComplexPolynomial()
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * cofactor_det(minor)
        out = out + term if j % 2 == 0 else out - term
    return out


def test_normalization_trims_leading_zeros():
    P = MatrixPolynomial([np.eye(2), np.zeros((2, 2))])
    assert P.degree == 0
    Z = MatrixPolynomial([np.zeros((2, 2))])
    assert Z.is_zero()


def test_evaluate_examples(rng):
    assert np.array_equal(exa()(0), np.eye(2))
    A = [crandn(rng, 3, 3) for _ in range(4)]
    P = MatrixPolynomial(A)
    lam = 1 + 1j
    naive = sum(lam ** j * A[j] for j in range(4))
    assert np.max(np.abs(P(lam) - naive)) < 1e-13 * np.max(np.abs(naive))
    assert np.array_equal(P(0), A[0])


def test_determinant_examples():
    assert determinant(exa()).allclose(ComplexPolynomial([1]), 1e-12)
    assert determinant(sing("regular")).allclose(ComplexPolynomial([1, -2, 1]), 1e-12)
    assert determinant(sing("singular")).is_zero()


def test_determinant_matches_cofactor_expansion():
    rng = np.random.default_rng(21)
    for _ in range(200):
        c = rng.integers(-3, 4, size=(3, 3, 3)).astype(float)
        P = MatrixPolynomial(list(c))
        entries = [[ComplexPolynomial(c[:, i, j]) for j in range(3)] for i in range(3)]
        ref = cofactor_det(entries)
        got = determinant(P)
        m = max(ref.coeffs.size, got.coeffs.size, 1)
        a = np.zeros(m, complex)
        b = np.zeros(m, complex)
        a[: ref.coeffs.size] = ref.coeffs
        b[: got.coeffs.size] = got.coeffs
        assert np.max(np.abs(a - b), initial=0.0) <= 1e-9 * max(1.0, np.max(np.abs(a), initial=0.0))


def test_eigenvalue_examples():
    P = MatrixPolynomial([-np.diag([2.0, 3.0]), np.eye(2)])
    ev = eigenvalues(P)
    assert match(ev.finite, [2, 3]) < 1e-12 and ev.infinite == 0 and ev.regular
    ev = eigenvalues(MatrixPolynomial([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))
    assert match(ev.finite, [0]) < 1e-12 and ev.infinite == 1
    ev = eigenvalues(sing("regular"))
    assert match(ev.finite, [1, 1]) < 1e-7
    ev = eigenvalues(sing("singular"))
    assert not ev.regular


def test_derivative_reversal_substitute_examples():
    dP = exa().derivative()
    assert dP.allclose(MatrixPolynomial([np.array([[0, 1], [1, 0]]), np.diag([0, 2])]))
    R = MatrixPolynomial([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]).reversal()
    assert R.allclose(MatrixPolynomial([np.diag([0.0, 1.0]), np.diag([1.0, 0.0])]))
    Q = exa().substitute_affine(1.0, -1j)
    assert determinant(Q).allclose(ComplexPolynomial([1]), 1e-12)
    for lam in (0.3, 1j, -2 + 0.5j):
        assert np.allclose(Q(lam), exa()(lam - 1j))


def seeded_P(seed: int) -> MatrixPolynomial:
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    return MatrixPolynomial([crandn(rng, n, n) for _ in range(d + 1)])


@pytest.mark.parametrize("seed", range(20))
def test_affine_substitution_moves_eigenvalues(seed):
    P = seeded_P(seed)
    rng = np.random.default_rng(100 + seed)
    alpha = complex(*rng.uniform(0.5, 2, 2))
    beta = complex(*rng.normal(size=2))
    ev = eigenvalues(P).finite
    evq = eigenvalues(P.substitute_affine(alpha, beta)).finite
    assert match(evq, (ev - beta) / alpha) < 1e-8 * (1 + np.max(np.abs(ev), initial=0))


@pytest.mark.parametrize("seed", range(20))
def test_reversal_inverts_nonzero_eigenvalues(seed):
    P = seeded_P(seed)
    ev = eigenvalues(P).finite
    evr = eigenvalues(P.reversal()).finite
    nz = evr[np.abs(evr) > 1e-8]
    assert match(1 / nz, ev[np.abs(ev) < 1e8]) < 1e-7 * (1 + np.max(np.abs(ev)))


@given(st.integers(0, 10_000), st.floats(0.2, 3), st.floats(-2, 2), st.floats(-2, 2))
def test_chain_rule(seed, ar, br, bi):
    P = seeded_P(seed)
    alpha, beta = complex(ar, 0.3), complex(br, bi)
    lhs = P.substitute_affine(alpha, beta).derivative()
    rhs = P.derivative().substitute_affine(alpha, beta).scaled(alpha)
    assert lhs.allclose(rhs, 1e-12 * max(1.0, float(np.max(np.abs(rhs.coeffs), initial=1.0))))


def test_entries_linear_independence_examples():
    t = ComplexPolynomial([0, 1])
    one = ComplexPolynomial([1])
    P1 = MatrixPolynomial.from_entries([[one, t], [t * t, t * t * t]])
    assert entries_linearly_independent(P1)
    P2 = MatrixPolynomial.from_entries([[t, ComplexPolynomial()], [ComplexPolynomial(), one]])
    assert not entries_linearly_independent(P2)
    assert entries_linearly_independent(hyper_nsinf(0.01).derivative())


def test_common_isotropic_vector_examples():
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    x = common_isotropic_vector([-J, J])
    assert x is not None and abs(np.vdot(x, J @ x)) < 1e-8
    A2, A1, A0 = np.diag([1.0, 0.0]), np.array([[0.0, 1.0], [1.0, 0.0]]), np.diag([0.0, 1.0])
    assert common_isotropic_vector([A0, A1, A2]) is None
    assert common_isotropic_vector([np.eye(2)]) is None


def test_kernel_intersection_examples():
    assert not kernel_intersection_singularity(np.zeros((2, 2)), [np.eye(2)], 0)
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    assert not kernel_intersection_singularity(J, [np.zeros((2, 2))], 0)
    A = np.diag([1.0, 0.0])
    assert kernel_intersection_singularity(np.zeros((2, 2)), [A, A], 0)


def test_kernel_intersection_rejects_bad_input():
    with pytest.raises(HypothesisViolated):
        kernel_intersection_singularity(np.eye(2), [np.eye(2)], 0)
    with pytest.raises(HypothesisViolated):
        kernel_intersection_singularity(np.zeros((2, 2)), [-np.eye(2)], 0)


def test_norms_examples():
    n = norms(np.eye(2))
    assert (n.two_norm, n.frobenius, n.sigma_min) == pytest.approx((1, math.sqrt(2), 1))
    n = norms(np.ones((2, 2)))
    assert (n.two_norm, n.frobenius, n.sigma_min) == pytest.approx((2, 2, 0), abs=1e-12)
    n = norms(np.array([[0.0, 2.0], [0.0, 0.0]]))
    assert (n.two_norm, n.frobenius, n.sigma_min) == pytest.approx((2, 2, 0), abs=1e-12)


def test_json_round_trip(rng):
    P = MatrixPolynomial([crandn(rng, 2, 2) for _ in range(3)])
    assert MatrixPolynomial.from_json(P.to_json()).allclose(P, 0)


def test_from_json_rejects_ragged():
    with pytest.raises(SchemaError):
        MatrixPolynomial.from_json({"coeffs": [[[[1, 0]], [[0, 0], [1, 0]]]]})


def test_every_small_integer_family_regularity_agrees():
    # all 2x2 pencils with entries in {-1,0,1}: regular iff det is not identically zero
    vals = (-1.0, 0.0, 1.0)
    count = 0
    for a in itertools.islice(itertools.product(vals, repeat=8), 0, None, 97):
        A0 = np.array(a[:4]).reshape(2, 2)
        A1 = np.array(a[4:]).reshape(2, 2)
        P = MatrixPolynomial([A0, A1])
        c = [np.linalg.det(A0), A0[0, 0] * A1[1, 1] + A1[0, 0] * A0[1, 1] - A0[0, 1] * A1[1, 0] - A1[0, 1] * A0[1, 0],
             np.linalg.det(A1)]
        assert eigenvalues(P).regular == any(abs(x) > 1e-12 for x in c)
        count += 1
    assert count > 60
