"""Field of values of matrices and numerical range of matrix polynomials.

``W(P) = {z : x* P(z) x = 0 for some x != 0}``.  For a constant matrix the
question ``0 in W(A)`` is answered with a rotation certificate (No) or an
explicit witness vector (Yes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import minimize_scalar

from .config import Budget, DEFAULT_BUDGET
from .matpoly import MatrixPolynomial, hermitian_part
from .regions import HALF_PLANE, Region
from .scalarpoly import ComplexPolynomial, roots

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FieldOfValuesQuery:
    theta_grid: int = 720
    refine_iters: int = 40
    tol: float = 1e-10


DEFAULT_QUERY = FieldOfValuesQuery()
SCREEN_QUERY = FieldOfValuesQuery(theta_grid=96, refine_iters=30)


def lambda_H(X: np.ndarray) -> float:
    """Largest eigenvalue of the Hermitian part of X."""
    return float(np.linalg.eigvalsh(hermitian_part(X))[-1])


def _rotated_hermitian(A: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    e = np.exp(1j * np.asarray(thetas))[..., None, None]
    return 0.5 * (e * A + np.conj(e) * A.conj().T)


def _golden_max(f, a: float, b: float, iters: int) -> tuple[float, float]:
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc > fd else (d, fd)


def _max_over_theta(A: np.ndarray, which: int, q: FieldOfValuesQuery) -> tuple[float, float]:
    """max over theta of an extreme eigenvalue of Re(e^{i theta} A).

    ``which=-1`` maximizes the largest eigenvalue, ``which=0`` the smallest.
    """
    thetas = 2.0 * np.pi * np.arange(q.theta_grid) / q.theta_grid
    vals = np.linalg.eigvalsh(_rotated_hermitian(A, thetas))[:, which]
    k = int(np.argmax(vals))
    h = 2.0 * np.pi / q.theta_grid

    def f(t):
        return float(np.linalg.eigvalsh(_rotated_hermitian(A, t))[which])

    t, v = _golden_max(f, thetas[k] - h, thetas[k] + h, q.refine_iters)
    if v < vals[k]:
        t, v = float(thetas[k]), float(vals[k])
    return float(np.mod(t, 2.0 * np.pi)), float(v)


def numerical_radius(A: np.ndarray, q: FieldOfValuesQuery = DEFAULT_QUERY) -> float:
    """``w(A) = max_theta lambda_max(Re(e^{i theta} A))`` by grid plus golden refinement."""
    A = np.asarray(A, dtype=complex)
    _, w = _max_over_theta(A, -1, q)
    nrm = float(np.linalg.norm(A, 2))
    if not (0.5 * nrm - q.tol * max(1.0, nrm) <= w <= nrm + q.tol * max(1.0, nrm)):
        raise ArithmeticError(f"numerical radius {w} violates the norm sandwich for ||A||={nrm}")
    return w


@dataclass(frozen=True)
class ZeroInRange:
    """Answer to ``0 in W(A)``: status is "no", "yes" or "unknown"."""

    status: str
    theta: float | None = None
    witness: np.ndarray | None = None
    margin: float = 0.0

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status, "margin": self.margin}
        if self.theta is not None:
            out["theta"] = self.theta
        if self.witness is not None:
            out["witness"] = [[float(v.real), float(v.imag)] for v in self.witness]
        return out


def _combine_to_real(A, x1, z1, x2, z2):
    """Vectors in span{x1, x2} whose Rayleigh values are real.

    Requires ``im z1 > 0 > im z2``.  Returns two (vector, real value) pairs
    lying on both sides of the real crossing of the segment [z1, z2].
    """
    p = np.vdot(x1, A @ x2)
    qv = np.vdot(x2, A @ x1)
    w = np.conj(p - np.conj(qv))
    e = w / abs(w) if abs(w) > 0 else 1.0
    t = math.atan(math.sqrt(-z1.imag / z2.imag))
    out = []
    for sgn in (1.0, -1.0):
        x = math.cos(t) * x1 + sgn * e * math.sin(t) * x2
        nx = np.linalg.norm(x)
        if nx == 0:
            continue
        x = x / nx
        out.append((x, np.vdot(x, A @ x).real))
    return out


def _solve_between(A, xa, ra, xb, rb):
    """x in span{xa, xb} with x*Ax = 0 given real values ra < 0 < rb."""
    p = np.vdot(xa, A @ xb)
    qv = np.vdot(xb, A @ xa)
    w = np.conj(p - np.conj(qv))
    e = w / abs(w) if abs(w) > 0 else 1.0
    s = (e * p + np.conj(e) * qv).real
    tau = (-s + math.sqrt(s * s - 4.0 * ra * rb)) / (2.0 * rb)
    x = xa + tau * e * xb
    return x / np.linalg.norm(x)


def zero_in_numerical_range(A: np.ndarray, q: FieldOfValuesQuery = DEFAULT_QUERY,
                            scale: float | None = None) -> ZeroInRange:
    """Decide ``0 in W(A)``.

    No: some rotation makes the Hermitian part positive definite beyond
    ``tol * scale``.  Yes: a witness x with ``|x*Ax| <= tol * scale`` built
    from support-point eigenvectors.  Otherwise Unknown.  ``scale`` defaults
    to ``||A||``; callers evaluating a polynomial pass its magnitude instead.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    nrm = float(np.linalg.norm(A, 2)) if scale is None else max(float(scale), float(np.linalg.norm(A, 2)))
    if nrm == 0:
        return ZeroInRange("yes", witness=np.eye(n, dtype=complex)[0])
    thr = q.tol * nrm
    theta, best = _max_over_theta(A, 0, q)
    if best > thr:
        return ZeroInRange("no", theta=theta, margin=best / nrm)
    thetas = 2.0 * np.pi * np.arange(q.theta_grid) / q.theta_grid
    _, vecs = np.linalg.eigh(_rotated_hermitian(A, thetas))
    cands = [vecs[k, :, -1] for k in range(q.theta_grid)] + [vecs[k, :, 0] for k in range(q.theta_grid)]
    zs = np.array([np.vdot(x, A @ x) for x in cands])
    k = int(np.argmin(np.abs(zs)))
    if abs(zs[k]) <= thr:
        return ZeroInRange("yes", witness=cands[k], margin=best / nrm)
    reals: list[tuple[np.ndarray, float]] = []
    real_mask = np.abs(zs.imag) <= thr
    for idx in np.flatnonzero(real_mask):
        reals.append((cands[idx], zs[idx].real))
    m = q.theta_grid
    for i in range(m):
        j = (i + 1) % m
        for a, b in ((i, j), (i + m, j + m)):
            za, zb = zs[a], zs[b]
            if za.imag > thr and zb.imag < -thr:
                reals.extend(_combine_to_real(A, cands[a], za, cands[b], zb))
            elif zb.imag > thr and za.imag < -thr:
                reals.extend(_combine_to_real(A, cands[b], zb, cands[a], za))
    if reals:
        vals = np.array([r for _, r in reals])
        ia, ib = int(np.argmin(vals)), int(np.argmax(vals))
        ra, rb = vals[ia], vals[ib]
        if abs(ra) <= thr:
            return ZeroInRange("yes", witness=reals[ia][0], margin=best / nrm)
        if abs(rb) <= thr:
            return ZeroInRange("yes", witness=reals[ib][0], margin=best / nrm)
        if ra < 0 < rb:
            x = _solve_between(A, reals[ia][0], ra, reals[ib][0], rb)
            if abs(np.vdot(x, A @ x)) <= thr:
                return ZeroInRange("yes", witness=x, margin=best / nrm)
    return ZeroInRange("unknown", margin=best / nrm)


def wp_contains(P: MatrixPolynomial, lam: complex, q: FieldOfValuesQuery = DEFAULT_QUERY) -> ZeroInRange:
    """``lam in W(P)`` is the question ``0 in W(P(lam))``.

    Tolerances are relative to ``sum_j |lam|^j ||A_j||``.
    """
    lam = complex(lam)
    scale = sum(abs(lam) ** j * float(np.linalg.norm(A, 2)) for j, A in enumerate(P.coeffs))
    return zero_in_numerical_range(P(lam), q, scale)


# ---------------------------------------------------------------------------
# disjointness of W(P) from a region


@dataclass(frozen=True)
class NumRangeVerdict:
    status: str                      # "disjoint" | "intersects" | "unknown"
    label: str | None = None         # "proven" | "grid-certified" for disjoint
    method: str | None = None
    witness_lambda: complex | None = None
    witness_x: np.ndarray | None = None
    samples_used: int = 0
    worst_margin: float | None = None
    notes: list = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status, "label": self.label, "method": self.method,
                               "samples_used": self.samples_used, "worst_margin": self.worst_margin}
        if self.witness_lambda is not None:
            out["witness_lambda"] = [self.witness_lambda.real, self.witness_lambda.imag]
        if self.witness_x is not None:
            out["witness_x"] = [[float(v.real), float(v.imag)] for v in self.witness_x]
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _scalar_structure(P: MatrixPolynomial, rtol: float = 1e-12):
    """Return (p, M) when ``P(z) = p(z) M`` for a constant matrix M."""
    c = P.coeffs
    norms_ = np.linalg.norm(c.reshape(c.shape[0], -1), axis=1)
    j0 = int(np.argmax(norms_))
    M = c[j0]
    mm = np.vdot(M, M)
    coefs = np.array([np.vdot(M, A) / mm for A in c])
    resid = max(np.linalg.norm(A - a * M) for A, a in zip(c, coefs))
    if resid > rtol * norms_[j0]:
        return None
    return ComplexPolynomial(coefs), M


def _definite_rotation(M: np.ndarray, tol: float = 1e-12):
    """Angle alpha with e^{i alpha} M Hermitian positive definite, if any."""
    nrm = np.linalg.norm(M, 2)
    if nrm == 0:
        return None
    tr = np.trace(M)
    if abs(tr) == 0:
        return None
    alpha = -np.angle(tr)
    R = np.exp(1j * alpha) * M
    if np.linalg.norm(R - R.conj().T) > tol * nrm:
        return None
    if np.linalg.eigvalsh(hermitian_part(R))[0] <= tol * nrm:
        return None
    return float(alpha)


def _region_hits(D: Region, zs: np.ndarray) -> np.ndarray:
    return D.contains_array(zs, 0.0)


def _intersection_search(P: MatrixPolynomial, D: Region, budget: Budget, rng: np.random.Generator,
                         q: FieldOfValuesQuery):
    """Alternate between roots of x*P(z)x and vectors minimizing |x*P(z)x|."""
    n = P.n
    samples = 0
    best = -np.inf
    starts = [np.eye(n, dtype=complex)[i] for i in range(n)]
    while len(starts) < budget.nr_restarts + n:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        starts.append(v / np.linalg.norm(v))
    for x in starts:
        for _ in range(4):
            coeffs = np.einsum("i,kij,j->k", x.conj(), P.coeffs, x)
            s = ComplexPolynomial(np.where(np.abs(coeffs) > 1e-14 * np.max(np.abs(coeffs)), coeffs, 0))
            samples += 1
            if s.is_zero():
                lam = D.interior_point()
                return lam, x, samples, best
            if s.degree == 0:
                break
            rs = roots(s).roots
            m = D.margins(rs)
            hits = _region_hits(D, rs)
            if hits.any():
                k = int(np.argmax(np.where(hits, m, -np.inf)))
                return complex(rs[k]), x, samples, max(best, float(m[k]))
            k = int(np.argmax(m))
            best = max(best, float(m[k]))
            lam = _pull_inside(D, complex(rs[k]))
            ans = wp_contains(P, lam, q)
            samples += 1
            if ans.status == "yes":
                return lam, ans.witness, samples, best
            if ans.theta is None:
                break
            H = _rotated_hermitian(P(lam), ans.theta)
            x = np.linalg.eigh(H)[1][:, 0].astype(complex)
    return None, None, samples, best


def _pull_inside(D: Region, z: complex) -> complex:
    """Point of D near z: bisection along the segment to an interior point."""
    if D.contains(z):
        return z
    a = D.interior_point()
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if D.contains(a + mid * (z - a)):
            lo = mid
        else:
            hi = mid
    return complex(a + lo * (z - a))


def wp_disjoint_from(P: MatrixPolynomial, D: Region, budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                     q: FieldOfValuesQuery = SCREEN_QUERY,
                     halfplane_monotone: bool = False) -> NumRangeVerdict:
    """Three-valued test of ``W(P) cap D = {}``.

    Disjoint is reported only with a certificate: scalar P (root check),
    ``P = p(z) M`` with 0 outside W(M), a pencil ``z A_1 + A_0`` with
    ``e^{i a} A_1`` positive definite over a half-plane (exact eigenvalue
    test), or a half-plane grid check when the caller asserts monotonicity.
    Intersects carries a witness (lambda, x).
    """
    rng = np.random.default_rng(seed)
    if P.is_zero():
        return NumRangeVerdict("intersects", method="zero", witness_lambda=D.interior_point(),
                               witness_x=np.eye(P.n, dtype=complex)[0])
    if P.n == 1:
        p = P.entry(0, 0)
        if p.degree == 0:
            return NumRangeVerdict("disjoint", "proven", "scalar")
        rs = roots(p).roots
        hits = _region_hits(D, rs)
        if hits.any():
            return NumRangeVerdict("intersects", method="scalar", witness_lambda=complex(rs[np.argmax(hits)]),
                                   witness_x=np.ones(1, dtype=complex))
        return NumRangeVerdict("disjoint", "proven", "scalar", worst_margin=float(np.max(D.margins(rs))))
    sc = _scalar_structure(P)
    if sc is not None:
        p, M = sc
        ans = zero_in_numerical_range(M, DEFAULT_QUERY)
        if ans.status == "no":
            if p.degree == 0:
                return NumRangeVerdict("disjoint", "proven", "scalar-definite")
            rs = roots(p).roots
            hits = _region_hits(D, rs)
            if not hits.any():
                return NumRangeVerdict("disjoint", "proven", "scalar-definite",
                                       worst_margin=float(np.max(D.margins(rs))))
            v = rng.standard_normal(P.n) + 0j
            return NumRangeVerdict("intersects", method="scalar-definite",
                                   witness_lambda=complex(rs[np.argmax(hits)]), witness_x=v / np.linalg.norm(v))
        if ans.status == "yes":
            return NumRangeVerdict("intersects", method="scalar-definite", witness_lambda=D.interior_point(),
                                   witness_x=ans.witness)
    lam, x, samples, best = _intersection_search(P, D, budget, rng, q)
    if lam is not None:
        return NumRangeVerdict("intersects", method="alternating", witness_lambda=lam, witness_x=x,
                               samples_used=samples, worst_margin=best)
    if P.degree == 1 and D.kind == HALF_PLANE:
        alpha = _definite_rotation(P.coeffs[1])
        if alpha is not None:
            # W(P) = W(B) with B = -L^{-1} A0 L^{-*}, e^{i a} A1 = L L*
            L = np.linalg.cholesky(hermitian_part(np.exp(1j * alpha) * P.coeffs[1]))
            Li = np.linalg.inv(L)
            B = -Li @ (np.exp(1j * alpha) * P.coeffs[0]) @ Li.conj().T
            # max over W(B) of im(z e^{i phi}) = lambda_max(Re(e^{i(phi - pi/2)} B))
            top = float(np.linalg.eigvalsh(_rotated_hermitian(B, D.phi - math.pi / 2))[-1])
            gap = D.offset - top
            if gap > 0 or (gap == 0 and not D.closed):
                return NumRangeVerdict("disjoint", "proven", "definite-pencil", samples_used=samples,
                                       worst_margin=-gap)
    if D.kind == HALF_PLANE and halfplane_monotone:
        ok, worst = _halfplane_grid(P, D, budget)
        if ok:
            return NumRangeVerdict("disjoint", "grid-certified", "halfplane-grid", samples_used=samples,
                                   worst_margin=worst)
    return NumRangeVerdict("unknown", samples_used=samples, worst_margin=best)


def _halfplane_grid(P: MatrixPolynomial, D: Region, budget: Budget) -> tuple[bool, float]:
    """Check 0 outside W(P(z)) on boundary and interior samples of a half-plane."""
    k = budget.boundary_grid
    t = np.tan(np.linspace(-0.49 * np.pi, 0.49 * np.pi, k))
    rot = np.exp(-1j * D.phi)
    pts = [(s + 1j * D.offset) * rot for s in t]
    pts += [(s + 1j * (D.offset + h)) * rot for s in t[::8] for h in (0.5, 2.0, 8.0)]
    worst = np.inf
    for z in pts:
        ans = wp_contains(P, z, SCREEN_QUERY)
        if ans.status != "no":
            return False, ans.margin
        worst = min(worst, ans.margin)
    return True, float(worst)
