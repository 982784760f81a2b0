"""Exponential norm bounds for stable matrix polynomials.

Bounds are expressed through the first two coefficients A_1, A_2 of a
polynomial normalized by A_0 = I (or through a_1, a_2 of a scalar p with
p(0) = 1).  ``compare`` evaluates every applicable bound and picks the
tightest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import NoApplicableBound, NotMonic, NotNormalized, NotStable, PreconditionViolated, ShapeMismatch
from .matpoly import MatrixPolynomial, hermitian_part
from .numrange import lambda_H, wp_disjoint_from
from .regions import Region, H
from .scalarpoly import EPS, ComplexPolynomial, roots

HYP_TOL = 1e-10
TAGS = ("thm_szasz", "frob", "alt", "pA1", "pA2", "svn")


def _fro(X: np.ndarray) -> float:
    return float(np.linalg.norm(X, "fro"))


def _two(X: np.ndarray) -> float:
    return float(np.linalg.norm(X, 2))


def _exp(x: float) -> float:
    # an overflowing bound is still a valid (vacuous) upper bound
    return math.exp(x) if x < 709.0 else math.inf


@dataclass(frozen=True)
class FactoredPolynomial:
    """``P(z) = (I + z B_1) ... (I + z B_d)`` with ``Im B_j <= 0``."""

    factors: tuple
    n: int

    def __init__(self, factors: Sequence[np.ndarray], n: int | None = None):
        fs = tuple(np.asarray(B, dtype=complex) for B in factors)
        if n is None:
            if not fs:
                raise ShapeMismatch("n is required without factors")
            n = fs[0].shape[0]
        for j, B in enumerate(fs):
            if B.shape != (n, n):
                raise ShapeMismatch(f"factor {j} is not {n}x{n}")
            imag = (B - B.conj().T) / 2j
            top = float(np.linalg.eigvalsh(hermitian_part(imag))[-1])
            if top > HYP_TOL * max(1.0, _two(B)):
                raise PreconditionViolated(f"Im B_{j + 1} is not negative semidefinite (max eig {top:.3g})")
        object.__setattr__(self, "factors", fs)
        object.__setattr__(self, "n", int(n))

    @property
    def d(self) -> int:
        return len(self.factors)

    @property
    def A1(self) -> np.ndarray:
        return sum(self.factors, np.zeros((self.n, self.n), dtype=complex))

    @property
    def A2(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=complex)
        for j in range(self.d):
            for k in range(j + 1, self.d):
                out += self.factors[j] @ self.factors[k]
        return out

    def expanded(self) -> MatrixPolynomial:
        P = MatrixPolynomial([np.eye(self.n)])
        for B in self.factors:
            P = P @ MatrixPolynomial([np.eye(self.n), B])
        return P

    def __call__(self, lam: complex) -> np.ndarray:
        out = np.eye(self.n, dtype=complex)
        for B in self.factors:
            out = out @ (np.eye(self.n) + lam * B)
        return out


def _check_monic(P: MatrixPolynomial) -> None:
    if P.is_zero() or not np.allclose(P.coeff(0), np.eye(P.n), atol=1e-12, rtol=0):
        raise NotMonic("A_0 must be the identity")


def bound_thm_szasz(P: MatrixPolynomial, lam: complex) -> float:
    """``2 exp(lambda_H(z A_1 - |z|^2 A_2) + |z|^2 ||A_1||^2 / 2)`` (two-norm bound)."""
    _check_monic(P)
    lam = complex(lam)
    A1, A2 = P.coeff(1), P.coeff(2)
    r2 = abs(lam) ** 2
    return 2.0 * _exp(lambda_H(lam * A1 - r2 * A2) + 0.5 * r2 * _two(A1) ** 2)


def bound_frob(F: FactoredPolynomial, lam: complex) -> float:
    """``n^{d/2} exp(tr Re(z A_1)/n + (||A_1||_F^2 - 2 tr Re A_2)|z|^2 / (2n))``."""
    n, d = F.n, F.d
    lam = complex(lam)
    A1, A2 = F.A1, F.A2
    expo = (np.trace(lam * A1).real / n
            + (_fro(A1) ** 2 - 2.0 * np.trace(A2).real) * abs(lam) ** 2 / (2.0 * n))
    return n ** (d / 2.0) * _exp(expo)


def bound_alt(F: FactoredPolynomial, lam: complex) -> float:
    """``exp(tr Re(z A_1) + (||A_1||_F^2 - 2 tr Re A_2)|z|^2 / 2 + d(n-1)/2)``."""
    n, d = F.n, F.d
    lam = complex(lam)
    A1, A2 = F.A1, F.A2
    expo = (np.trace(lam * A1).real + 0.5 * (_fro(A1) ** 2 - 2.0 * np.trace(A2).real) * abs(lam) ** 2
            + d * (n - 1) / 2.0)
    return _exp(expo)


def _scalar_pre(p: ComplexPolynomial) -> tuple[complex, complex, int]:
    if p.is_zero() or abs(p.coeff(0) - 1.0) > 1e-12:
        raise NotNormalized("p(0) must equal 1")
    if p.degree >= 1 and not _h0_stable(p):
        raise NotStable("p has a zero in the open upper half-plane")
    return p.coeff(1), p.coeff(2), p.degree


def _h0_stable(p: ComplexPolynomial) -> bool:
    # a k-fold real root is computed with error ~ eps^(1/k); scale the slack by cluster size
    rs = roots(p).roots
    for z in rs:
        k = int(np.sum(np.abs(rs - z) <= 1e-3 * (1.0 + abs(z))))
        tol = max(1e-9, 8.0 * EPS ** (1.0 / k)) * (1.0 + abs(z))
        if z.imag > tol:
            return False
    return True


def _gamma(a1: complex, a2: complex) -> float:
    # nonnegative for stable p; clip rounding noise
    return max(0.0, abs(a1) ** 2 - 2.0 * a2.real)


def bound_pA1(p: ComplexPolynomial, A: np.ndarray) -> float:
    """``sqrt(n^d) exp(tr Re(a_1 A)/n + (|a_1|^2 - 2 re a_2)||A||_F^2/(2n))`` (Frobenius)."""
    a1, a2, d = _scalar_pre(p)
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    expo = np.trace(a1 * A).real / n + _gamma(a1, a2) * _fro(A) ** 2 / (2.0 * n)
    return math.sqrt(n ** d) * _exp(expo)


def bound_pA2(p: ComplexPolynomial, A: np.ndarray) -> float:
    """``exp(||A|| sqrt(d (|a_1|^2 - 2 re a_2)))`` (two-norm)."""
    a1, a2, d = _scalar_pre(p)
    return _exp(_two(np.asarray(A, dtype=complex)) * math.sqrt(d * _gamma(a1, a2)))


def bound_svn(p: ComplexPolynomial, A: np.ndarray) -> float:
    """``exp(|a_1| ||A|| + (|a_1|^2 - 2 re a_2)||A||^2 / 2)`` (two-norm)."""
    a1, a2, _ = _scalar_pre(p)
    nA = _two(np.asarray(A, dtype=complex))
    return _exp(abs(a1) * nA + 0.5 * _gamma(a1, a2) * nA ** 2)


def matrix_horner(p: ComplexPolynomial, A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    out = np.zeros_like(A)
    for a in p.coeffs[::-1]:
        out = out @ A + a * np.eye(A.shape[0])
    return out


# ---------------------------------------------------------------------------
# comparison report


@dataclass(frozen=True)
class BoundReport:
    lam: complex | None
    lhs: float
    norm: str
    bounds: dict
    tightest: str
    flags: dict = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"lhs": self.lhs, "norm": self.norm, "bounds": dict(self.bounds),
                               "tightest": self.tightest}
        if self.lam is not None:
            out["lambda"] = [self.lam.real, self.lam.imag]
        if self.flags:
            out["flags"] = dict(self.flags)
        return out


def halfplane_hypothesis(P: MatrixPolynomial, directions: int = 16) -> bool:
    """Whether W(P) is certified to lie in some open half-plane H_phi.

    W(P) in H_phi is W(P) disjoint from the closed complementary half-plane.
    """
    for k in range(directions):
        phi = 2.0 * math.pi * k / directions
        comp = Region.half_plane(phi + math.pi, 0.0, closed=True)
        v = wp_disjoint_from(P, comp)
        if v.status == "disjoint" and v.label == "proven":
            return True
    return False


def _pick(bounds: dict) -> str:
    live = {k: v for k, v in bounds.items() if isinstance(v, float)}
    if not live:
        raise NoApplicableBound("no bound has its hypotheses met")
    return min(live, key=lambda k: (live[k], TAGS.index(k)))


def compare(obj, lam: complex | None = None, assert_hypothesis: bool = False) -> BoundReport:
    """Evaluate every applicable bound.

    ``obj`` is a MatrixPolynomial with A_0 = I (two-norm report), a
    FactoredPolynomial (Frobenius report) or a pair ``(p, A)`` (Frobenius
    report of ``||p(A)||_F``).  Two-norm bounds enter Frobenius reports
    multiplied by ``sqrt(n)``.
    """
    bounds: dict[str, Any] = {}
    flags: dict[str, Any] = {}
    if isinstance(obj, tuple):
        p, A = obj
        A = np.asarray(A, dtype=complex)
        rn = math.sqrt(A.shape[0])
        lhs = _fro(matrix_horner(p, A))
        bounds["pA1"] = bound_pA1(p, A)
        bounds["pA2"] = bound_pA2(p, A) * rn
        bounds["svn"] = bound_svn(p, A) * rn
        return BoundReport(None, lhs, "frobenius", bounds, _pick(bounds), flags)
    lam = complex(lam if lam is not None else 0.0)
    if isinstance(obj, FactoredPolynomial):
        P = obj.expanded()
        rn = math.sqrt(obj.n)
        lhs = _fro(obj(lam))
        ok = assert_hypothesis or halfplane_hypothesis(P)
        flags["thm_szasz_hypothesis"] = "asserted" if assert_hypothesis else ("verified" if ok else "unverified")
        bounds["thm_szasz"] = bound_thm_szasz(P, lam) * rn if ok else "hypothesis not met"
        bounds["frob"] = bound_frob(obj, lam)
        bounds["alt"] = bound_alt(obj, lam)
        if obj.d == 0:
            flags["frob"] = "degenerate: bound formula assumes d>=1"
            flags["alt"] = "degenerate: bound formula assumes d>=1"
            bounds["frob"] = "hypothesis not met"
            bounds["alt"] = "hypothesis not met"
        return BoundReport(lam, lhs, "frobenius", bounds, _pick(bounds), flags)
    if isinstance(obj, MatrixPolynomial):
        _check_monic(obj)
        lhs = _two(obj(lam))
        ok = assert_hypothesis or halfplane_hypothesis(obj)
        flags["thm_szasz_hypothesis"] = "asserted" if assert_hypothesis else ("verified" if ok else "unverified")
        bounds["thm_szasz"] = bound_thm_szasz(obj, lam) if ok else "hypothesis not met"
        return BoundReport(lam, lhs, "two", bounds, _pick(bounds), flags)
    raise TypeError("compare expects a MatrixPolynomial, FactoredPolynomial or (p, A)")


# ---------------------------------------------------------------------------
# fixtures with closed forms


def ones_factored(n: int, d: int) -> FactoredPolynomial:
    """``(I + z C)^d`` with C the all-ones matrix."""
    C = np.ones((n, n))
    return FactoredPolynomial([C] * d, n=n)


def ones_lhs_squared(n: int, d: int, lam: float) -> float:
    return (n * lam + 1.0) ** (2 * d) + n - 1


def ones_frob_closed(n: int, d: int, lam: float) -> float:
    return n ** (d / 2.0) * math.exp(d * lam + n * d / 2.0 * lam ** 2)


def _psd_sqrt(M: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(hermitian_part(M))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T


@dataclass(frozen=True)
class CmvFixture:
    """``P_k = (I + C z/k)^k (I + S z/sqrt k)^k (I - S z/sqrt k)^k``.

    C is the all-ones matrix and ``S`` the principal square root of
    ``D_k = I + (n(k-1)/(2k)) C``.
    """

    n: int
    k: int

    @property
    def C(self) -> np.ndarray:
        return np.ones((self.n, self.n))

    @property
    def S(self) -> np.ndarray:
        Dk = np.eye(self.n) + self.n * (self.k - 1) / (2.0 * self.k) * self.C
        return _psd_sqrt(Dk)

    def __call__(self, lam: complex) -> np.ndarray:
        I = np.eye(self.n)
        k = self.k
        F1 = np.linalg.matrix_power(I + self.C * lam / k, k)
        F2 = np.linalg.matrix_power(I + self.S * lam / math.sqrt(k), k)
        F3 = np.linalg.matrix_power(I - self.S * lam / math.sqrt(k), k)
        return F1 @ F2 @ F3

    def factored(self) -> FactoredPolynomial:
        k = self.k
        fs = [self.C / k] * k + [self.S / math.sqrt(k)] * k + [-self.S / math.sqrt(k)] * k
        return FactoredPolynomial(fs, n=self.n)

    def as_matrix_polynomial(self) -> MatrixPolynomial:
        if 3 * self.k > 60:
            raise ValueError("expanded form is limited to 3k <= 60; evaluate the product instead")
        return self.factored().expanded()

    def closed_form(self, y: float) -> np.ndarray:
        """Closed form of ``P_k(iy)`` for this construction."""
        n, k = self.n, self.k
        y = float(y)
        base = ((y * y + k) / k) ** k
        t = (n * y * 1j / k + 1.0) ** k * (n * n * y * y * (k - 1) / (2.0 * k * (y * y + k)) + 1.0) ** k
        return base * (np.eye(n) + (t - 1.0) / n * self.C)

    @staticmethod
    def limit(n: int, y: float) -> float:
        """``lim_k ||P_k(iy)||_F = e^{y^2} (e^{n^2 y^2} + n - 1)^{1/2}``."""
        return math.exp(y * y) * math.sqrt(math.exp(n * n * y * y) + n - 1)


def cmv_fixture(n: int, k: int, y: float = 1.0) -> tuple[CmvFixture, float]:
    return CmvFixture(n, k), CmvFixture.limit(n, y)


COMP_CASES = {
    1: (ComplexPolynomial([1, -3, 3, -1]), np.ones((2, 2))),
    2: (ComplexPolynomial([1, -3, 3, -1]), np.array([[-1.0, 1.0], [1.0, -1.0]])),
    3: (ComplexPolynomial([1, -1, -1, 1]), -np.eye(2)),
}

COMP_EXPECTED = {
    1: {"pA1": 2 * math.sqrt(2), "pA2": math.exp(6) * math.sqrt(2), "svn": math.exp(12) * math.sqrt(2)},
    2: {"pA1": 2 * math.exp(6) * math.sqrt(2), "pA2": math.exp(6) * math.sqrt(2),
        "svn": math.exp(12) * math.sqrt(2)},
    3: {"pA1": 2 * math.exp(2.5) * math.sqrt(2), "pA2": math.exp(3) * math.sqrt(2),
        "svn": math.exp(2.5) * math.sqrt(2)},
}


def comp_case(case: int) -> tuple[ComplexPolynomial, np.ndarray]:
    if case not in COMP_CASES:
        raise ValueError("comp case must be 1, 2 or 3")
    return COMP_CASES[case]


# ---------------------------------------------------------------------------
# inequality gaps (rhs - lhs, nonnegative when the inequality holds)


def gap_mlog(A: np.ndarray) -> tuple[float, float]:
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    lhs = math.log(_fro(np.eye(n) / math.sqrt(n) + A))
    rhs = np.trace(A).real / math.sqrt(n) + 0.5 * _fro(A) ** 2
    return rhs - lhs, rhs


def gap_sums(Bs: Sequence[np.ndarray]) -> tuple[float, float]:
    Bs = [np.asarray(B, dtype=complex) for B in Bs]
    lhs = sum(_fro(B) ** 2 for B in Bs)
    S = sum(Bs)
    cross = sum((Bs[j] @ Bs[k] for j in range(len(Bs)) for k in range(j + 1, len(Bs))),
                np.zeros_like(Bs[0]))
    rhs = _fro(S) ** 2 - 2.0 * np.trace(cross).real
    return rhs - lhs, rhs


def gap_imm(A: np.ndarray) -> tuple[float, float]:
    A = np.asarray(A, dtype=complex)
    lhs = math.log(_two(np.eye(A.shape[0]) + A))
    rhs = _two(A)
    return rhs - lhs, rhs


def disc_sup(p: ComplexPolynomial, radius: float, samples: int = 4096, refine: int = 60) -> float:
    """``sup_{|z| <= radius} |p(z)|`` from boundary samples plus golden refinement."""
    if radius == 0:
        return abs(p(0.0))
    t = 2.0 * np.pi * np.arange(samples) / samples
    vals = np.abs(p(radius * np.exp(1j * t)))
    k = int(np.argmax(vals))
    h = 2.0 * np.pi / samples
    a, b = t[k] - h, t[k] + h
    g = (math.sqrt(5.0) - 1.0) / 2.0
    f = lambda s: abs(p(radius * complex(math.cos(s), math.sin(s))))
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(refine):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return max(float(vals[k]), fc, fd)


def gap_von_neumann(p: ComplexPolynomial, A: np.ndarray) -> tuple[float, float]:
    A = np.asarray(A, dtype=complex)
    lhs = _two(matrix_horner(p, A))
    rhs = disc_sup(p, _two(A))
    return rhs - lhs, rhs


def gap_de_branges(p: ComplexPolynomial, lam: complex) -> tuple[float, float]:
    """Margin of ``|p(z)| <= exp(re(a_1 z) + (|a_1|^2 - 2 re a_2)|z|^2/2)``."""
    a1, a2 = p.coeff(1), p.coeff(2)
    lam = complex(lam)
    expo = (a1 * lam).real + 0.5 * (abs(a1) ** 2 - 2.0 * a2.real) * abs(lam) ** 2
    if expo > 700.0:
        # the bound exceeds every double; the inequality holds trivially
        return math.inf, math.inf
    rhs = math.exp(expo)
    return rhs - abs(p(lam)), rhs
