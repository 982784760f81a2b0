"""Square matrix polynomials ``P(z) = sum_j z^j A_j``."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import IndexOutOfRange, SchemaError, ShapeMismatch, HypothesisViolated
from .scalarpoly import ComplexPolynomial, _complex_from_json, roots

TAU_DET = 1e-10
TAU_RANK = 1e-10


class MatrixPolynomial:
    """Dense coefficient stack of shape ``(d+1, n, n)``, ascending in degree.

    Trailing exactly-zero coefficients are trimmed; the zero polynomial keeps
    its size ``n`` and has degree -1.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Sequence[np.ndarray] | np.ndarray, n: int | None = None):
        c = np.array(coeffs, dtype=complex)
        if c.size == 0:
            if n is None:
                raise ShapeMismatch("the size of a zero matrix polynomial must be given")
            c = np.zeros((0, n, n), dtype=complex)
        if c.ndim == 2:
            c = c[None]
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ShapeMismatch("coefficients must be square matrices of one size")
        nz = [j for j in range(c.shape[0]) if np.any(c[j] != 0)]
        c = c[: nz[-1] + 1] if nz else c[:0]
        c.setflags(write=False)
        self._c = c

    @classmethod
    def from_scalar(cls, p: ComplexPolynomial) -> "MatrixPolynomial":
        return cls(p.coeffs.reshape(-1, 1, 1), n=1)

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence[ComplexPolynomial | Sequence[complex]]]) -> "MatrixPolynomial":
        """Build from an n x n table of scalar polynomials."""
        n = len(entries)
        polys = [[e if isinstance(e, ComplexPolynomial) else ComplexPolynomial(e) for e in row] for row in entries]
        d = max(max(p.degree for p in row) for row in polys)
        c = np.zeros((max(d, 0) + 1, n, n), dtype=complex)
        for i, row in enumerate(polys):
            if len(row) != n:
                raise ShapeMismatch("entry table must be square")
            for j, p in enumerate(row):
                c[: p.degree + 1, i, j] = p.coeffs
        return cls(c, n=n)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def n(self) -> int:
        return self._c.shape[1]

    @property
    def degree(self) -> int:
        return self._c.shape[0] - 1

    def is_zero(self) -> bool:
        return self._c.shape[0] == 0

    def coeff(self, j: int) -> np.ndarray:
        if 0 <= j <= self.degree:
            return self._c[j]
        return np.zeros((self.n, self.n), dtype=complex)

    def __call__(self, z):
        """Horner evaluation; array input gives a stack of matrices."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (self.n, self.n), dtype=complex)
        zz = z[..., None, None]
        for A in self._c[::-1]:
            out = out * zz + A
        return out

    evaluate = __call__

    def entry(self, i: int, j: int) -> ComplexPolynomial:
        return ComplexPolynomial(self._c[:, i, j])

    def derivative(self) -> "MatrixPolynomial":
        if self.degree <= 0:
            return MatrixPolynomial([], n=self.n)
        k = np.arange(1, self.degree + 1)[:, None, None]
        return MatrixPolynomial(self._c[1:] * k, n=self.n)

    def reversal(self) -> "MatrixPolynomial":
        return MatrixPolynomial(self._c[::-1], n=self.n)

    def substitute_affine(self, alpha: complex, beta: complex = 0j) -> "MatrixPolynomial":
        """Coefficients of ``P(alpha z + beta)`` by binomial re-expansion."""
        d = self.degree
        if d < 0:
            return self
        out = np.zeros_like(self._c)
        for j in range(d + 1):
            for k in range(j + 1):
                out[k] += math.comb(j, k) * alpha ** k * beta ** (j - k) * self._c[j]
        return MatrixPolynomial(out, n=self.n)

    def left_right(self, L: np.ndarray | None = None, R: np.ndarray | None = None) -> "MatrixPolynomial":
        c = self._c
        if L is not None:
            c = np.einsum("ij,kjl->kil", L, c)
        if R is not None:
            c = np.einsum("kij,jl->kil", c, R)
        return MatrixPolynomial(c, n=c.shape[1] if c.size else self.n)

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> "MatrixPolynomial":
        c = self._c[:, rows][:, :, cols]
        return MatrixPolynomial(c, n=len(rows))

    def __add__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        d = max(self.degree, other.degree)
        out = np.zeros((d + 1, self.n, self.n), dtype=complex)
        out[: self.degree + 1] += self._c
        out[: other.degree + 1] += other._c
        return MatrixPolynomial(out, n=self.n)

    def __matmul__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        if self.is_zero() or other.is_zero():
            return MatrixPolynomial([], n=self.n)
        out = np.zeros((self.degree + other.degree + 1, self.n, other.n), dtype=complex)
        for i, A in enumerate(self._c):
            for j, B in enumerate(other._c):
                out[i + j] += A @ B
        return MatrixPolynomial(out, n=self.n)

    def scaled(self, s: complex) -> "MatrixPolynomial":
        return MatrixPolynomial(self._c * s, n=self.n)

    def __eq__(self, other) -> bool:
        return isinstance(other, MatrixPolynomial) and self._c.shape == other._c.shape and bool(
            np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def allclose(self, other: "MatrixPolynomial", atol: float = 1e-12) -> bool:
        d = max(self.degree, other.degree) + 1
        a = np.zeros((d, self.n, self.n), dtype=complex)
        b = np.zeros((d, other.n, other.n), dtype=complex)
        if a.shape != b.shape:
            return False
        a[: self.degree + 1] = self._c
        b[: other.degree + 1] = other._c
        return bool(np.allclose(a, b, atol=atol, rtol=0))

    def __repr__(self) -> str:
        return f"MatrixPolynomial(n={self.n}, degree={self.degree})"

    def to_json(self) -> dict[str, Any]:
        return {"n": self.n, "coeffs": [_matrix_to_json(A) for A in self._c]}

    @classmethod
    def from_json(cls, doc: Any) -> "MatrixPolynomial":
        if not isinstance(doc, dict) or "coeffs" not in doc:
            raise SchemaError("", "expected an object with a 'coeffs' array of matrices")
        mats = [_matrix_from_json(A, f"/coeffs/{j}") for j, A in enumerate(doc["coeffs"])]
        n = doc.get("n", mats[0].shape[0] if mats else None)
        if n is None:
            raise SchemaError("/n", "size is required for an empty coefficient list")
        for j, A in enumerate(mats):
            if A.shape != (n, n):
                raise SchemaError(f"/coeffs/{j}", f"expected a {n}x{n} matrix")
        return cls(np.array(mats) if mats else [], n=n)


def _matrix_to_json(A: np.ndarray) -> list:
    return [[[float(a.real), float(a.imag)] for a in row] for row in np.asarray(A, dtype=complex)]


def _matrix_from_json(A: Any, pointer: str) -> np.ndarray:
    if not isinstance(A, list) or not A or not all(isinstance(r, list) for r in A):
        raise SchemaError(pointer, "matrices are arrays of rows")
    width = len(A[0])
    rows = []
    for i, r in enumerate(A):
        if len(r) != width:
            raise SchemaError(f"{pointer}/{i}", "ragged matrix row")
        rows.append([_complex_from_json(v, f"{pointer}/{i}/{k}") for k, v in enumerate(r)])
    return np.array(rows, dtype=complex)


# ---------------------------------------------------------------------------
# determinant and eigenvalues


def default_radius(P: MatrixPolynomial) -> float:
    """Interpolation radius: geometric mean of consecutive coefficient-norm ratios.

    That is ``(||A_lo|| / ||A_d||)^(1/(d-lo))`` with ``lo`` the lowest nonzero
    coefficient, clamped to [1e-2, 1e2].
    """
    norms_ = [np.linalg.norm(A, 2) for A in P.coeffs]
    nz = [j for j, v in enumerate(norms_) if v > 0]
    if len(nz) < 2:
        return 1.0
    lo, hi = nz[0], nz[-1]
    g = (norms_[lo] / norms_[hi]) ** (1.0 / (hi - lo))
    return min(1e2, max(1e-2, g))


def determinant(P: MatrixPolynomial, radius: float | None = None,
                tau_det: float = TAU_DET) -> ComplexPolynomial:
    """Coefficients of det P by interpolation at scaled roots of unity.

    det P has degree at most ``d*n``; it is sampled at ``d*n + 1`` points on a
    circle and recovered by an inverse DFT.  Coefficients below
    ``tau_det * max|c|`` or below ``tau_det`` times the Hadamard bound of the
    samples are set to zero, so singular inputs give the zero polynomial.
    """
    if P.is_zero():
        return ComplexPolynomial()
    d, n = P.degree, P.n
    N = d * n + 1
    rho = float(radius) if radius else default_radius(P)
    w = rho * np.exp(2j * np.pi * np.arange(N) / N)
    M = P(w)
    f = np.linalg.det(M)
    c = np.fft.fft(f) / N
    powers = rho ** np.arange(N)
    c = c / powers
    hadamard = float(np.max(np.prod(np.linalg.norm(M, axis=2), axis=1)))
    floor = tau_det * hadamard / powers
    cut = np.maximum(tau_det * np.max(np.abs(c)), floor)
    c = np.where(np.abs(c) < cut, 0, c)
    return ComplexPolynomial(c)


@dataclass(frozen=True)
class Eigenvalues:
    finite: np.ndarray
    infinite: int
    regular: bool
    det: ComplexPolynomial

    def to_json(self) -> dict[str, Any]:
        return {"regular": self.regular,
                "finite": [[float(z.real), float(z.imag)] for z in self.finite],
                "infinite_multiplicity": self.infinite,
                "det": self.det.to_json()["coeffs"]}


def _refine(P: MatrixPolynomial, dP: MatrixPolynomial, ev: np.ndarray, steps: int = 3) -> np.ndarray:
    """Newton steps on det P using ``det'/det = tr(P^{-1} P')``.

    A step is taken only if it is small next to the distance to the other
    eigenvalues and it reduces |det P|.
    """
    ev = ev.copy()
    for k in range(ev.size):
        others = np.delete(ev, k)
        gap = np.min(np.abs(others - ev[k])) if others.size else np.inf
        z = ev[k]
        fz = abs(np.linalg.det(P(z)))
        for _ in range(steps):
            M = P(z)
            try:
                t = np.trace(np.linalg.solve(M, dP(z)))
            except np.linalg.LinAlgError:
                break
            if not np.isfinite(t) or t == 0:
                break
            step = 1.0 / t
            if abs(step) > 0.1 * gap:
                break
            cand = z - step
            fc = abs(np.linalg.det(P(cand)))
            if not fc < fz:
                break
            z, fz = cand, fc
        ev[k] = z
    return ev


def eigenvalues(P: MatrixPolynomial, refine: bool = True) -> Eigenvalues:
    """Finite eigenvalues are the roots of det P; the rest sit at infinity."""
    det = determinant(P)
    dn = max(P.degree, 0) * P.n
    if det.is_zero():
        return Eigenvalues(np.zeros(0, dtype=complex), 0, False, det)
    if det.degree == 0:
        return Eigenvalues(np.zeros(0, dtype=complex), dn, True, det)
    ev = roots(det).roots
    if refine and ev.size:
        ev = _refine(P, P.derivative(), ev)
        ev = ev[np.lexsort((ev.imag, ev.real))]
    return Eigenvalues(ev, dn - det.degree, True, det)


# ---------------------------------------------------------------------------
# structural queries


def span_rank(mats: Sequence[np.ndarray], tau_rank: float = TAU_RANK) -> int:
    """Dimension of the linear span of a list of matrices."""
    if len(mats) == 0:
        return 0
    M = np.array([np.asarray(A, dtype=complex).reshape(-1) for A in mats])
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tau_rank * s[0]))


def entries_linearly_independent(P: MatrixPolynomial, tau_rank: float = TAU_RANK) -> bool:
    """Whether the n^2 entry polynomials of P are linearly independent.

    Independence needs ``n^2 <= d + 1``; the rank of the ``n^2 x (d+1)``
    coefficient matrix is compared with ``n^2`` using ``tau_rank * sigma_max``.
    """
    n = P.n
    if P.is_zero():
        return False
    M = P.coeffs.reshape(P.degree + 1, n * n).T
    if n * n > P.degree + 1:
        return False
    s = np.linalg.svd(M, compute_uv=False)
    return bool(s[0] > 0 and np.sum(s > tau_rank * s[0]) == n * n)


def hermitian_part(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    return 0.5 * (X + X.conj().T)


def skew_part(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    return 0.5 * (X - X.conj().T)


def is_hermitian(X: np.ndarray, tol: float = 1e-10) -> bool:
    X = np.asarray(X, dtype=complex)
    return bool(np.linalg.norm(X - X.conj().T) <= tol * max(1.0, np.linalg.norm(X)))


def is_skew(X: np.ndarray, tol: float = 1e-10) -> bool:
    X = np.asarray(X, dtype=complex)
    return bool(np.linalg.norm(X + X.conj().T) <= tol * max(1.0, np.linalg.norm(X)))


def is_psd(X: np.ndarray, tol: float = 1e-10) -> bool:
    """Hermitian with smallest eigenvalue >= -tol (relative to the norm)."""
    if not is_hermitian(X, tol):
        return False
    w = np.linalg.eigvalsh(hermitian_part(X))
    return bool(w[0] >= -tol * max(1.0, abs(w[-1])))


def common_kernel_dim(mats: Sequence[np.ndarray], tau_rank: float = TAU_RANK) -> int:
    n = np.asarray(mats[0]).shape[1]
    stack = np.vstack([np.asarray(A, dtype=complex) for A in mats])
    s = np.linalg.svd(stack, compute_uv=False)
    if s[0] == 0:
        return n
    return n - int(np.sum(s > tau_rank * s[0]))


def common_isotropic_vector(coeffs: Sequence[np.ndarray], seeds: int = 64,
                            seed: int = 0, threshold: float = 1e-16) -> np.ndarray | None:
    """Search a unit x with ``x* A_j x = 0`` for all j.

    Minimizes ``sum_j |x* A_j x|^2`` (coefficients normalized to unit norm)
    from ``seeds`` seeded starts; returns the first x reaching ``threshold``.
    """
    mats = [np.asarray(A, dtype=complex) for A in coeffs]
    scale = max(np.linalg.norm(A, 2) for A in mats)
    if scale == 0:
        return np.eye(mats[0].shape[0], dtype=complex)[0]
    mats = [A / scale for A in mats]
    n = mats[0].shape[0]
    stack = np.array(mats)
    stack_h = stack.conj().transpose(0, 2, 1)

    def fun(v):
        u = v[:n] + 1j * v[n:]
        nu2 = np.vdot(u, u).real
        Au = stack @ u
        q = u.conj() @ Au.T
        N = float(np.sum(np.abs(q) ** 2))
        F = N / nu2 ** 2
        dN = (np.conj(q)[:, None] * Au + q[:, None] * (stack_h @ u)).sum(axis=0)
        g = dN / nu2 ** 2 - 2.0 * N * u / nu2 ** 3
        return F, np.concatenate([2 * g.real, 2 * g.imag])

    rng = np.random.default_rng(seed)
    for _ in range(seeds):
        v0 = rng.standard_normal(2 * n)
        res = minimize(fun, v0, jac=True, method="BFGS", options={"gtol": 1e-14, "maxiter": 400})
        if res.fun <= threshold:
            u = res.x[:n] + 1j * res.x[n:]
            return u / np.linalg.norm(u)
    return None


def kernel_intersection_singularity(J: np.ndarray, As: Sequence[np.ndarray], j: int,
                                    check_determinant: bool = True) -> bool:
    """Singularity of ``sum_i z^i A_i - z^j J`` with A_i PSD and J skew.

    Singularity holds exactly when ``ker J`` and all ``ker A_i`` share a
    nonzero vector.  With ``check_determinant`` the answer is compared with
    the interpolated determinant and a warning is issued on disagreement.
    """
    J = np.asarray(J, dtype=complex)
    k = len(As) - 1
    if not 0 <= j <= k:
        raise IndexOutOfRange(f"j={j} outside 0..{k}")
    if not is_skew(J):
        raise HypothesisViolated("J skew", "J + J* is not zero")
    for i, A in enumerate(As):
        if not is_psd(A):
            raise HypothesisViolated(f"A_{i} PSD", "coefficient is not positive semidefinite")
    singular = common_kernel_dim([J, *As]) > 0
    if check_determinant:
        c = np.array([np.asarray(A, dtype=complex) for A in As])
        c[j] = c[j] - J
        by_det = determinant(MatrixPolynomial(c, n=J.shape[0])).is_zero()
        if by_det != singular:
            warnings.warn("kernel test and determinant disagree on singularity", RuntimeWarning)
    return singular


@dataclass(frozen=True)
class MatrixNorms:
    two_norm: float
    frobenius: float
    sigma_min: float


def norms(M: np.ndarray) -> MatrixNorms:
    s = np.linalg.svd(np.asarray(M, dtype=complex), compute_uv=False)
    return MatrixNorms(float(s[0]), float(np.sqrt(np.sum(s ** 2))), float(s[-1]))
