from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import crandn
from hyperstab.errors import NoApplicableBound, NotMonic, NotNormalized, NotStable, PreconditionViolated
from hyperstab.matpoly import MatrixPolynomial
from hyperstab.scalarpoly import ComplexPolynomial, random_stable_polynomial
from hyperstab.szasz import (COMP_EXPECTED, CmvFixture, FactoredPolynomial, bound_alt, bound_frob, bound_pA1,
                             bound_pA2, bound_svn, bound_thm_szasz, comp_case, compare, gap_de_branges, gap_imm,
                             gap_mlog, gap_sums, gap_von_neumann, matrix_horner, ones_factored)

SLACK = lambda lhs: 1e-9 * (1 + lhs)


def factor_with_nonpositive_imag(rng, n):
    """``H - i K`` with H Hermitian and K PSD, so that Im B = -K <= 0."""
    M = crandn(rng, n, n)
    G = crandn(rng, n, n) * float(rng.uniform(0, 1))
    return 0.5 * (M + M.conj().T) - 1j * (G @ G.conj().T)


def random_factored(rng):
    n, d = int(rng.integers(1, 4)), int(rng.integers(1, 5))
    return FactoredPolynomial([factor_with_nonpositive_imag(rng, n) * 0.5 for _ in range(d)])


# ---------------------------------------------------------------------------
# FactoredPolynomial


def test_factored_coefficients(rng):
    for _ in range(50):
        F = random_factored(rng)
        P = F.expanded()
        scale = 1 + sum(np.linalg.norm(B) for B in F.factors) ** 2
        assert np.allclose(P.coeff(0), np.eye(F.n))
        assert np.linalg.norm(P.coeff(1) - F.A1) <= 1e-10 * scale
        assert np.linalg.norm(P.coeff(2) - F.A2) <= 1e-10 * scale
        lam = complex(*rng.normal(size=2))
        assert np.allclose(P(lam), F(lam), atol=1e-10 * scale ** F.d)


def test_factored_rejects_positive_imag():
    with pytest.raises(PreconditionViolated):
        FactoredPolynomial([np.eye(2) * 1j])


# ---------------------------------------------------------------------------
# Theorem-type two-norm bound


def test_thm_szasz_pencil_at_i():
    P = MatrixPolynomial([np.eye(2), np.eye(2)])
    assert bound_thm_szasz(P, 1j) == pytest.approx(2 * math.exp(0.5), rel=1e-12)
    assert np.linalg.norm(P(1j), 2) == pytest.approx(math.sqrt(2))


def test_thm_szasz_identity():
    P = MatrixPolynomial([np.eye(3)])
    for lam in (0, 1, 2j, -3 + 1j):
        assert bound_thm_szasz(P, lam) == pytest.approx(2.0)
    rep = compare(P, 0.7)
    assert rep.tightest == "thm_szasz"
    assert rep.bounds["thm_szasz"] == pytest.approx(2.0)
    assert rep.lhs == pytest.approx(1.0)


def test_thm_szasz_not_monic():
    with pytest.raises(NotMonic):
        bound_thm_szasz(MatrixPolynomial([2 * np.eye(2), np.eye(2)]), 1.0)


def test_thm_szasz_sweep(rng):
    # factored polynomials with Im B_j < 0 strictly keep W(P) in a half-plane
    checked = 0
    for _ in range(30):
        n, d = int(rng.integers(1, 3)), int(rng.integers(1, 4))
        fs = [factor_with_nonpositive_imag(rng, n) * 0.4 - 0.3j * np.eye(n) for _ in range(d)]
        P = FactoredPolynomial(fs).expanded()
        for lam in 1.5 * (rng.standard_normal(6) + 1j * rng.standard_normal(6)):
            lhs = np.linalg.norm(P(lam), 2)
            assert bound_thm_szasz(P, lam) >= lhs - SLACK(lhs)
            checked += 1
    assert checked == 180


# ---------------------------------------------------------------------------
# Frobenius bounds on factored polynomials


def test_ones_frob_at_one():
    F = ones_factored(2, 2)
    assert bound_frob(F, 1.0) == pytest.approx(2 * math.exp(4), rel=1e-12)
    lhs = np.linalg.norm(F(1.0), "fro")
    assert lhs == pytest.approx(math.sqrt(82), rel=1e-12)
    assert lhs <= 2 * math.exp(4)


def test_ones_alt_at_one():
    F = ones_factored(2, 2)
    # A_1 = 2C, A_2 = C^2 = 2C, tr Re A_1 = 4, ||A_1||_F^2 = 16, tr Re A_2 = 4
    expected = math.exp(4 + 0.5 * (16 - 8) + 1)
    assert bound_alt(F, 1.0) == pytest.approx(expected, rel=1e-12)
    assert bound_alt(F, 1.0) >= math.sqrt(82)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_ones_closed_form(n, d, lam):
    F = ones_factored(n, d)
    lhs2 = np.linalg.norm(F(lam), "fro") ** 2
    closed = (n * lam + 1) ** (2 * d) + n - 1
    assert abs(lhs2 - closed) <= 1e-10 * closed
    assert bound_frob(F, lam) == pytest.approx(n ** (d / 2) * math.exp(d * lam + n * d / 2 * lam ** 2), rel=1e-12)


def test_alt_scalar_case_has_no_extra_term(rng):
    for _ in range(20):
        F = FactoredPolynomial([factor_with_nonpositive_imag(rng, 1) for _ in range(3)])
        lam = complex(*rng.normal(size=2))
        assert bound_alt(F, lam) == pytest.approx(bound_frob(F, lam), rel=1e-12)


def test_frob_alt_sweep(rng):
    for _ in range(200):
        F = random_factored(rng)
        lam = complex(*rng.uniform(-2, 2, size=2))
        lhs = np.linalg.norm(F(lam), "fro")
        assert bound_frob(F, lam) >= lhs - SLACK(lhs)
        assert bound_alt(F, lam) >= lhs - SLACK(lhs)


def test_empty_factorization_is_flagged():
    F = FactoredPolynomial([], n=2)
    assert bound_frob(F, 1.0) == pytest.approx(1.0)
    rep = compare(F, 1.0, assert_hypothesis=True)
    assert "degenerate" in rep.flags["frob"]
    assert rep.bounds["frob"] == "hypothesis not met"
    assert rep.tightest == "thm_szasz"


# ---------------------------------------------------------------------------
# p(A) bounds


@pytest.mark.parametrize("case", [1, 2, 3])
def test_comp_values(case):
    p, A = comp_case(case)
    rep = compare((p, A))
    for tag, value in COMP_EXPECTED[case].items():
        assert rep.bounds[tag] == pytest.approx(value, rel=1e-12)
    assert rep.lhs <= min(rep.bounds.values()) + SLACK(rep.lhs)


def test_comp_each_case_has_distinct_winner():
    winners = [compare(comp_case(c)).tightest for c in (1, 2, 3)]
    assert sorted(winners) == ["pA1", "pA2", "svn"]


def test_comp_case_range():
    with pytest.raises(ValueError):
        comp_case(4)


def test_scalar_preconditions():
    A = np.eye(2)
    with pytest.raises(NotNormalized):
        bound_pA1(ComplexPolynomial([2, 1]), A)
    with pytest.raises(NotStable):
        bound_svn(ComplexPolynomial.from_roots([1j]) * (1 / 1j) * -1, A)


def test_no_applicable_bound():
    with pytest.raises(NoApplicableBound):
        # W(P) is (-inf, -1] U [1, inf), which no open half-plane contains
        compare(MatrixPolynomial([np.eye(2), np.diag([1.0, -1.0])]), 1.0)


def _normalized_stable(rng, d):
    p = random_stable_polynomial(rng, d)
    return ComplexPolynomial(p.coeffs / p.coeff(0))


def test_pa_bounds_sweep(rng):
    for _ in range(200):
        d = int(rng.integers(1, 5))
        p = _normalized_stable(rng, d)
        n = int(rng.integers(1, 4))
        A = crandn(rng, n, n) * float(rng.uniform(0.1, 1.5))
        PA = matrix_horner(p, A)
        fro, two = np.linalg.norm(PA, "fro"), np.linalg.norm(PA, 2)
        assert bound_pA1(p, A) >= fro - SLACK(fro)
        assert bound_pA2(p, A) >= two - SLACK(two)
        assert bound_svn(p, A) >= two - SLACK(two)


def test_matrix_horner_matches_powers(rng):
    for _ in range(20):
        p = ComplexPolynomial(crandn(rng, 4))
        A = crandn(rng, 3, 3)
        ref = sum(c * np.linalg.matrix_power(A, j) for j, c in enumerate(p.coeffs))
        assert np.allclose(matrix_horner(p, A), ref)


# ---------------------------------------------------------------------------
# cmv construction


def test_cmv_limits():
    assert CmvFixture.limit(1, 1.0) == pytest.approx(math.exp(1.5), rel=1e-12)
    assert CmvFixture.limit(2, 1.0) == pytest.approx(math.e * math.sqrt(math.exp(4) + 1), rel=1e-12)


@pytest.mark.parametrize("n,k", [(1, 8), (2, 5), (2, 64), (3, 17)])
def test_cmv_closed_form_matches_product(n, k):
    fx = CmvFixture(n, k)
    for y in (0.3, 1.0):
        M = fx(1j * y)
        assert np.allclose(M, fx.closed_form(y), rtol=1e-10, atol=1e-10 * np.linalg.norm(M))


def test_cmv_factors_satisfy_hypothesis():
    fx = CmvFixture(2, 6)
    F = fx.factored()
    assert F.d == 18
    assert np.allclose(F(0.4j), fx(0.4j))


def test_cmv_convergence():
    lim = CmvFixture.limit(2, 1.0)
    errs = [abs(np.linalg.norm(CmvFixture(2, k)(1j), "fro") - lim) for k in (1024, 4096, 8192)]
    assert errs[0] > errs[1] > errs[2]


def test_cmv_expanded_cap():
    with pytest.raises(ValueError):
        CmvFixture(2, 32).as_matrix_polynomial()


# ---------------------------------------------------------------------------
# auxiliary inequalities


def test_mlog_lemma(rng):
    worst = math.inf
    for _ in range(10_000):
        n = int(rng.integers(1, 5))
        A = crandn(rng, n, n) * float(rng.uniform(0.01, 2))
        gap, _ = gap_mlog(A)
        worst = min(worst, gap)
    assert worst >= -1e-12


def test_sums_lemma(rng):
    for _ in range(2000):
        n, d = int(rng.integers(1, 4)), int(rng.integers(1, 6))
        gap, rhs = gap_sums([factor_with_nonpositive_imag(rng, n) for _ in range(d)])
        assert gap >= -1e-10 * (1 + abs(rhs))


def test_imm_lemma(rng):
    for _ in range(2000):
        n = int(rng.integers(1, 5))
        gap, _ = gap_imm(crandn(rng, n, n) * float(rng.uniform(0.01, 3)))
        assert gap >= -1e-12


def test_von_neumann(rng):
    for _ in range(200):
        p = ComplexPolynomial(crandn(rng, int(rng.integers(1, 6))))
        n = int(rng.integers(1, 4))
        gap, _ = gap_von_neumann(p, crandn(rng, n, n))
        assert gap >= -1e-9


@settings(max_examples=60)
@given(st.integers(0, 2**31 - 1), st.integers(1, 6))
def test_scalar_de_branges(seed, d):
    rng = np.random.default_rng(seed)
    p = _normalized_stable(rng, d)
    lam = complex(*rng.uniform(-3, 3, size=2))
    gap, rhs = gap_de_branges(p, lam)
    assert gap >= -1e-9 * (1 + rhs)
