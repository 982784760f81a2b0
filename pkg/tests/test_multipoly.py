from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import crandn
from hyperstab import fixtures
from hyperstab.config import Budget
from hyperstab.errors import (BoundarySpecialization, IndexOutOfRange, KappaTooSmall, PointOutsideD,
                              PreconditionViolated)
from hyperstab.matpoly import MatrixPolynomial
from hyperstab.multipoly import (MultiAffineSymmetricMP, SparseMVMatrixPoly, basic_transform, compose,
                                 compose_and_check, diagonal, elementary_symmetric, elementary_symmetric_all,
                                 gws_coincidence, mv_gauss_lucas_harness, mv_hyperstable, mv_stable, polarize,
                                 polarized_sparse, tkappa2_cross_check)
from hyperstab.regions import CLOSED_UNIT_DISC, H, Region
from hyperstab.scalarpoly import ComplexPolynomial

SMALL = Budget(x_samples=8, y_starts=8, det_min_starts=14, sphere_grid=512, nr_restarts=8)
PUNCTURED = Region.sector(-math.pi, math.pi, closed=True)   # C minus the origin
H0 = H(0.0)


def random_matpoly(rng, n, d):
    return MatrixPolynomial([crandn(rng, n, n) for _ in range(d + 1)])


def sym_oracle(j, z):
    return sum((np.prod(c) for c in itertools.combinations(z, j)), 0j) if j else 1.0


# ---------------------------------------------------------------------------
# elementary symmetric polynomials


def test_elementary_symmetric_examples():
    assert elementary_symmetric(0, [3, 4 + 1j]) == 1
    assert elementary_symmetric(2, [1, 2, 3]) == 11
    assert elementary_symmetric(3, [2] * 5) == pytest.approx(80)


def test_elementary_symmetric_range():
    with pytest.raises(IndexOutOfRange):
        elementary_symmetric(4, [1, 2, 3])
    with pytest.raises(IndexOutOfRange):
        elementary_symmetric(-1, [1])


@settings(max_examples=60)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=0, max_size=7))
def test_elementary_symmetric_matches_combinations(z):
    e = elementary_symmetric_all(z)
    for j in range(len(z) + 1):
        assert abs(e[j] - sym_oracle(j, z)) <= 1e-9 * (1 + 3.0 ** len(z)) * math.comb(len(z), j)


# ---------------------------------------------------------------------------
# polarisation


def test_polarize_sing_example():
    Q = polarize(fixtures.sing("singular"), 2)
    for z1, z2 in [(1 + 2j, -0.5), (0.3j, 2.0)]:
        expected = np.array([[z1 * z2, (z1 + z2) / 2], [(z1 + z2) / 2, 1]])
        assert np.allclose(Q([z1, z2]), expected)


def test_polarize_exa_determinant(rng):
    Q = polarize(fixtures.exa(), 2)
    for z1, z2 in crandn(rng, 20, 2):
        assert abs(np.linalg.det(Q([z1, z2])) - (1 - ((z1 - z2) / 2) ** 2)) <= 1e-12 * (1 + abs(z1 - z2) ** 2)


@pytest.mark.parametrize("kappa", [0, 1, 3, 7])
def test_polarize_constant(kappa):
    Q = polarize(MatrixPolynomial([np.eye(2)]), kappa)
    for z in np.random.default_rng(kappa).standard_normal((5, kappa)):
        assert np.allclose(Q(z), np.eye(2))


def test_kappa_too_small():
    with pytest.raises(KappaTooSmall):
        polarize(fixtures.exa(), 1)


def test_diagonal_round_trip(rng):
    for _ in range(100):
        n, d = int(rng.integers(1, 4)), int(rng.integers(0, 5))
        P = random_matpoly(rng, n, d)
        for kappa in (d, d + 1, d + 2):
            assert diagonal(polarize(P, kappa)).allclose(P, atol=1e-13)
    assert diagonal(polarize(fixtures.exa(), 2)).allclose(fixtures.exa())


def test_diagonal_evaluation(rng):
    for _ in range(20):
        P = random_matpoly(rng, 2, 3)
        Q = polarize(P, 5)
        for lam in crandn(rng, 16):
            assert np.allclose(Q([lam] * 5), P(lam), atol=1e-12 * (1 + abs(lam)) ** 3 * 10)


def test_polarization_is_symmetric_and_multiaffine(rng):
    P = random_matpoly(rng, 2, 3)
    Q = polarize(P, 4)
    z = crandn(rng, 4)
    for perm in itertools.permutations(range(4)):
        assert np.allclose(Q(z[list(perm)]), Q(z))
    for i in range(4):
        a, b, t = z.copy(), z.copy(), 0.37 - 1.2j
        a[i], b[i] = 0, 1
        mid = z.copy()
        mid[i] = t
        assert np.allclose(Q(mid), (1 - t) * Q(a) + t * Q(b))


def test_polarization_preserves_singularity(rng):
    for _ in range(10):
        P = random_matpoly(rng, 3, 2)
        Q = polarize(P, 4)
        for zeta in crandn(rng, 32):
            assert np.isclose(np.linalg.det(Q([zeta] * 4)), np.linalg.det(P(zeta)), rtol=1e-9, atol=1e-12)


def test_pencil_polarization_with_constant_determinant(rng):
    N = np.triu(crandn(rng, 3, 3), 1)
    S, T = crandn(rng, 3, 3), crandn(rng, 3, 3)
    P = MatrixPolynomial([S @ T, S @ N @ T])
    c = np.linalg.det(S @ T)
    for kappa in (1, 2, 5):
        Q = polarize(P, kappa)
        for z in crandn(rng, 32, kappa):
            assert abs(np.linalg.det(Q(z)) - c) <= 1e-9 * abs(c) * (1 + np.linalg.norm(z)) ** 3


def test_compose_matches_direct_substitution(rng):
    P = random_matpoly(rng, 2, 2)
    ps = [ComplexPolynomial(crandn(rng, 3)), ComplexPolynomial(crandn(rng, 2)), ComplexPolynomial(crandn(rng, 4))]
    C = compose(P, 3, ps)
    Q = polarize(P, 3)
    for t in crandn(rng, 10):
        assert np.allclose(C(t), Q([p(t) for p in ps]))


# ---------------------------------------------------------------------------
# sparse representation


def random_sparse(rng, kappa, n, terms=5):
    out = {}
    for _ in range(terms):
        e = tuple(int(v) for v in rng.integers(0, 4, size=kappa))
        out[e] = crandn(rng, n, n)
    return SparseMVMatrixPoly(kappa, out, n)


def test_sparse_horner_matches_termwise(rng):
    for _ in range(200):
        kappa, n = int(rng.integers(1, 5)), int(rng.integers(1, 3))
        Q = random_sparse(rng, kappa, n)
        z = crandn(rng, kappa)
        assert np.allclose(Q(z), Q.horner(z), rtol=1e-12, atol=1e-12 * (1 + np.abs(z).max()) ** 12)


def test_sparse_drops_zero_terms():
    Q = SparseMVMatrixPoly(2, {(1, 0): np.zeros((2, 2)), (0, 1): np.eye(2)})
    assert list(Q.terms) == [(0, 1)]


def test_sparse_json_round_trip(rng):
    Q = random_sparse(rng, 3, 2)
    assert SparseMVMatrixPoly.from_json(Q.to_json()) == Q


def test_polarized_sparse_agrees(rng):
    P = random_matpoly(rng, 2, 3)
    S, Q = polarized_sparse(P, 3), polarize(P, 3)
    for z in crandn(rng, 8, 3):
        assert np.allclose(S(z), Q(z))


def test_partial_derivative_examples():
    A = np.array([[1.0, 2], [3, 4]])
    d = SparseMVMatrixPoly(2, {(2, 0): A}).partial_derivative(1)
    assert d.terms.keys() == {(1, 0)} and np.allclose(d.terms[(1, 0)], 2 * A)
    Q = SparseMVMatrixPoly.from_entries(2, [[{(2, 0): 1}, {}], [{}, {(0, 2): 1}]])
    d1 = Q.partial_derivative(1)
    assert np.allclose(d1([0.7, 5.0]), [[1.4, 0], [0, 0]])
    m = SparseMVMatrixPoly.scalar(2, {(1, 2): 1.0}).partial_derivative(2)
    assert m.terms.keys() == {(1, 1)} and m.terms[(1, 1)][0, 0] == 2
    with pytest.raises(IndexOutOfRange):
        Q.partial_derivative(3)


def test_partial_derivative_finite_difference(rng):
    for _ in range(30):
        Q = random_sparse(rng, 3, 2)
        z = crandn(rng, 3)
        h = 1e-6
        for j in range(1, 4):
            e = np.zeros(3)
            e[j - 1] = h
            fd = (Q(z + e) - Q(z - e)) / (2 * h)
            assert np.allclose(Q.partial_derivative(j)(z), fd, rtol=1e-5, atol=1e-5 * np.abs(fd).max())


# ---------------------------------------------------------------------------
# coincidence points


def test_gws_example():
    Q = MultiAffineSymmetricMP(2, np.array([[[0]], [[0]], [[1]]]))
    z0 = gws_coincidence(Q, [1j, 2j], H0)
    assert abs(z0 - 1j * math.sqrt(2)) < 1e-12


def test_gws_equal_points():
    Q = polarize(MatrixPolynomial.from_scalar(ComplexPolynomial([1, 2, 3])), 2)
    assert abs(gws_coincidence(Q, [0.3j, 0.3j], H0) - 0.3j) < 1e-9


def test_gws_outside():
    Q = polarize(MatrixPolynomial.from_scalar(ComplexPolynomial([1, 2, 3])), 2)
    with pytest.raises(PointOutsideD):
        gws_coincidence(Q, [0.3j, -1j], H0)


def test_gws_sweep(rng):
    D = CLOSED_UNIT_DISC
    for _ in range(500):
        d = int(rng.integers(1, 5))
        p = ComplexPolynomial(crandn(rng, d + 1))
        Q = polarize(MatrixPolynomial.from_scalar(p), d)
        r, t = np.sqrt(rng.random(d)), 2 * np.pi * rng.random(d)
        pts = r * np.exp(1j * t)
        z0 = gws_coincidence(Q, pts, D)
        assert D.contains(z0, 1e-9)
        assert abs(p(z0) - Q(pts)[0, 0]) <= 1e-8 * (1 + np.abs(p.coeffs).sum())


# ---------------------------------------------------------------------------
# stability and hyperstability over product regions


def test_mv_stable_diag_punctured():
    Q = SparseMVMatrixPoly.from_entries(2, [[{(1, 0): 1}, {}], [{}, {(0, 1): 1}]])
    assert mv_stable(Q, [PUNCTURED, PUNCTURED], SMALL).status == "unknown_positive"


def test_mv_stable_exa_polarization_falsified():
    res = mv_stable(polarize(fixtures.exa(), 2), [H0, H0], SMALL)
    assert res.status == "falsified"
    z1, z2 = res.witness
    assert abs(abs(z1 - z2) - 2) < 1e-6
    assert H0.contains(z1) and H0.contains(z2)


def test_mv_stable_constant():
    Q = SparseMVMatrixPoly(2, {(0, 0): np.eye(2)})
    assert mv_stable(Q, [H0, H0], SMALL).status == "unknown_positive"


def test_mv_hyperstable_diag_punctured():
    Q = SparseMVMatrixPoly.from_entries(2, [[{(1, 0): 1}, {}], [{}, {(0, 1): 1}]])
    assert mv_hyperstable(Q, [PUNCTURED, PUNCTURED], SMALL).certified


def test_mv_hyperstable_upper_triangular():
    n = 3
    entries = [[{} for _ in range(n)] for _ in range(n)]
    for i in range(n):
        entries[i][i] = {(1, 0): 1.0}
        for j in range(i + 1, n):
            entries[i][j] = {(0, 1): 1.0 + j, (1, 1): 0.5}
    Q = SparseMVMatrixPoly.from_entries(2, entries)
    v = mv_hyperstable(Q, [PUNCTURED, Region.disc(0j, 10.0)], SMALL)
    assert v.certified and v.method == "BlockTriangular"


def test_polarisation_transfer_agrees():
    v = mv_hyperstable(polarize(fixtures.mgt(), 3), [H(math.pi / 2)] * 3, SMALL)
    assert v.certified and v.method == "Polarisation"


@pytest.mark.parametrize("name", ["exa", "mgt", "halfplane3x3", "sing/regular"])
def test_tkappa2_cross_check(name):
    P, D = next((P, D) for n, P, D in fixtures.corpus() if n == name)
    if D.kind not in ("disc", "half_plane"):
        pytest.skip("polarisation transfer is stated for discs and half-planes")
    rep = tkappa2_cross_check(P, max(P.degree, 1), D, SMALL)
    assert rep["agree"] is not False


def test_deg3_composition():
    hp = fixtures.halfplane3x3()
    rep = compose_and_check(hp.P, 2, [ComplexPolynomial([0, 0, 1]), ComplexPolynomial([0, 1])], H(math.pi / 2),
                            SMALL)
    assert rep.certified and not rep.eigen_violations
    from hyperstab.matpoly import eigenvalues
    mu = eigenvalues(rep.Q).finite
    inside = (np.abs(np.angle(mu)) < math.pi / 4 - 1e-8) & (np.abs(mu) > 1e-8)
    assert not inside.any()


def test_compose_rejects_sector():
    with pytest.raises(PreconditionViolated):
        compose_and_check(fixtures.exa(), 2, [ComplexPolynomial([0, 1])] * 2, Region.sector(0, 1))


# ---------------------------------------------------------------------------
# Gauss-Lucas harness and transforms


def test_harness_dependent_derivative():
    Q = SparseMVMatrixPoly.from_entries(2, [[{(2, 0): 1}, {}], [{}, {(0, 2): 1}]])
    rep = mv_gauss_lucas_harness(Q, 1, [H0, H0], SMALL)
    assert rep["derivative_independent"] is False
    assert rep["violations"] == []


def test_harness_product_of_linear(rng):
    for s in range(10):
        a, b = complex(rng.normal(), -abs(rng.normal())), complex(rng.normal(), -abs(rng.normal()))
        p = SparseMVMatrixPoly.scalar(2, {(1, 1): 1, (1, 0): -b, (0, 1): -a, (0, 0): a * b})
        rep = mv_gauss_lucas_harness(p, 1 + s % 2, [H0, H0], SMALL, seed=s)
        assert rep["violations"] == []


def test_harness_precondition():
    p = SparseMVMatrixPoly.scalar(2, {(1, 1): 1})
    with pytest.raises(PreconditionViolated):
        mv_gauss_lucas_harness(p, 1, [Region.disc(0j, 1.0), H0], SMALL)


def test_transform_permute():
    Q = SparseMVMatrixPoly.from_entries(2, [[{(1, 0): 1}, {}], [{}, {(0, 1): 1}]])
    R = basic_transform(Q, "permute", perm=[1, 0])
    assert np.allclose(R([2.0, 3.0]), np.diag([3.0, 2.0]))


def test_transform_specialize_interior():
    Q = SparseMVMatrixPoly.from_entries(2, [[{(1, 0): 1}, {}], [{}, {(0, 1): 1}]])
    R = basic_transform(Q, "specialize", 2, a=1j)
    assert R.kappa == 1
    assert mv_hyperstable(R, [H0], SMALL).certified


def test_transform_specialize_boundary():
    Q = SparseMVMatrixPoly.from_entries(2, [[{(1, 0): 1}, {}], [{}, {(0, 1): 1}]])
    with pytest.raises(BoundarySpecialization):
        basic_transform(Q, "specialize", 2, a=0.0)


def test_transform_invert_rotation(rng):
    # over H_0 the inversion z -> -1/z maps the upper half-plane to itself
    Q = random_sparse(rng, 2, 2)
    d = Q.degree_in(1)
    R = basic_transform(Q, "invert", 1)
    for z in crandn(rng, 5, 2):
        assert np.allclose(R(z), z[0] ** d * Q([-1 / z[0], z[1]]))


def test_transform_scale_and_diagonalize(rng):
    Q = random_sparse(rng, 3, 2)
    S = basic_transform(Q, "scale", 2, a=2.5)
    Dg = basic_transform(Q, "diagonalize", 2)
    for z in crandn(rng, 5, 3):
        assert np.allclose(S(z), Q([z[0], 2.5 * z[1], z[2]]))
        assert np.allclose(Dg([z[0], z[2]]), Q([z[0], z[0], z[2]]))
