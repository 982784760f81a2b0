from __future__ import annotations

import math

import numpy as np
import pytest

from hyperstab.fixtures import random_psd
from hyperstab.matpoly import MatrixPolynomial, eigenvalues
from hyperstab.numrange import (
    FieldOfValuesQuery,
    lambda_H,
    numerical_radius,
    wp_contains,
    wp_disjoint_from,
    zero_in_numerical_range,
)
from hyperstab.regions import UNIT_DISC, H, Region
from hyperstab.szasz import ones_factored

from conftest import crandn


def test_lambda_H_examples():
    assert lambda_H(np.eye(2)) == pytest.approx(1.0)
    assert lambda_H(1j * np.eye(2)) == pytest.approx(0.0, abs=1e-15)
    assert lambda_H(np.array([[0.0, 2.0], [0.0, 0.0]])) == pytest.approx(1.0)


def test_lambda_H_is_max_of_real_rayleigh_quotient(rng):
    X = crandn(rng, 4, 4)
    xs = crandn(rng, 20_000, 4)
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    rq = np.einsum("ij,jk,ik->i", xs.conj(), X, xs).real
    assert rq.max() <= lambda_H(X) + 1e-12
    assert rq.max() >= lambda_H(X) - 0.5


def test_numerical_radius_examples():
    assert numerical_radius(np.eye(2)) == pytest.approx(1.0, abs=1e-10)
    assert numerical_radius(np.array([[0.0, 1.0], [0.0, 0.0]])) == pytest.approx(0.5, abs=1e-10)
    assert numerical_radius(np.diag([1.0, -1.0])) == pytest.approx(1.0, abs=1e-10)


def test_numerical_radius_matches_dense_sweep():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    th = np.linspace(0, 2 * math.pi, 20_001)
    dense = max(np.linalg.eigvalsh(0.5 * (np.exp(1j * t) * A + np.exp(-1j * t) * A.conj().T))[-1] for t in th[::50])
    assert numerical_radius(A) == pytest.approx(dense, abs=1e-6)


def test_numerical_radius_sandwich():
    rng = np.random.default_rng(31)
    tol = 1e-10
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        A = crandn(rng, n, n)
        w = numerical_radius(A, FieldOfValuesQuery(theta_grid=64, refine_iters=30))
        nrm = np.linalg.norm(A, 2)
        assert nrm / 2 - tol <= w <= nrm + tol


def test_zero_in_numerical_range_examples():
    assert zero_in_numerical_range(np.eye(2)).status == "no"
    r = zero_in_numerical_range(np.diag([1.0, -1.0]))
    assert r.status == "yes"
    x = r.witness
    assert abs(np.vdot(x, np.diag([1.0, -1.0]) @ x)) < 1e-10 and abs(np.linalg.norm(x) - 1) < 1e-12
    r = zero_in_numerical_range(np.diag([1.0, 1j]))
    assert r.status == "no" and r.theta is not None


def test_segment_geometry_oracle():
    # W(diag(1, i)) is the segment [1, i]; dense torus sampling never gets near 0
    th = np.linspace(0, math.pi / 2, 400)
    ph = np.linspace(0, 2 * math.pi, 50)
    vals = [abs(math.cos(t) ** 2 + 1j * math.sin(t) ** 2) for t in th for _ in ph[:1]]
    assert min(vals) > 0.7


def lir_pencil():
    return MatrixPolynomial([np.diag([-1.0, -1.0]), np.diag([1.0, -1.0])])


def test_wp_contains_examples():
    assert wp_contains(lir_pencil(), 2.0).status == "yes"
    assert wp_contains(lir_pencil(), 0.5).status == "no"
    assert wp_contains(lir_pencil(), 1j).status == "no"


def test_wp_disjoint_examples():
    P = MatrixPolynomial([np.eye(2), np.eye(2)])
    v = wp_disjoint_from(P, UNIT_DISC)
    assert v.status == "disjoint"
    ones = ones_factored(2, 3).expanded()
    v = wp_disjoint_from(ones, H(0.0))
    assert v.status == "intersects"
    lam = v.witness_lambda
    x = v.witness_x
    assert H(0.0).contains(lam)
    assert abs(np.vdot(x, ones(lam) @ x)) <= 1e-8 * max(1.0, np.linalg.norm(ones(lam), 2))
    I = MatrixPolynomial([np.eye(2), np.zeros((2, 2)), np.zeros((2, 2))])
    for R in (UNIT_DISC, H(0.0), Region.disc_exterior(0j, 1.0), Region.sector(0.0, 1.0)):
        assert wp_disjoint_from(I, R).status == "disjoint"


def seeded(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(1, 4)), int(rng.integers(1, 3))
    return MatrixPolynomial([crandn(rng, n, n) for _ in range(d + 1)]), rng


@pytest.mark.parametrize("seed", range(15))
def test_shift_property(seed):
    P, rng = seeded(seed)
    alpha = complex(*rng.normal(size=2))
    lam = complex(*rng.normal(size=2))
    a = wp_contains(P.substitute_affine(1.0, alpha), lam).status
    b = wp_contains(P, lam + alpha).status
    assert "unknown" in (a, b) or a == b


@pytest.mark.parametrize("seed", range(15))
def test_reversal_property(seed):
    P, rng = seeded(seed)
    mu = complex(*rng.normal(size=2))
    a = wp_contains(P.reversal(), mu).status
    b = wp_contains(P, 1 / mu).status
    assert "unknown" in (a, b) or a == b


@pytest.mark.parametrize("seed", range(15))
def test_compression_property(seed):
    P, rng = seeded(seed)
    n = P.n
    S = crandn(rng, n + 2, n)
    Big = MatrixPolynomial([crandn(rng, n + 2, n + 2) for _ in range(P.degree + 1)])
    comp = MatrixPolynomial([S.conj().T @ A @ S for A in Big.coeffs])
    lam = complex(*rng.normal(size=2))
    if wp_contains(comp, lam).status == "yes":
        assert wp_contains(Big, lam).status in ("yes", "unknown")


@pytest.mark.parametrize("seed", range(15))
def test_eigenvalues_lie_in_numerical_range(seed):
    P, _ = seeded(seed)
    for mu in eigenvalues(P).finite:
        r = wp_contains(P, mu)
        assert r.status == "yes" or (r.status == "unknown" and abs(r.margin) <= 1e-9)


def test_psd_pencil_disjoint_from_right_half_plane():
    rng = np.random.default_rng(5)
    A, B = random_psd(rng, 3) + np.eye(3), random_psd(rng, 3) + np.eye(3)
    v = wp_disjoint_from(MatrixPolynomial([A, B]), H(math.pi / 2))
    assert v.status == "disjoint"
