"""Multivariate matrix polynomials and the polarisation operator.

Two representations are provided.  ``MultiAffineSymmetricMP`` stores a
symmetric multi-affine polynomial by levels, ``sum_j s_j(z) A_j / C(k, j)``,
which is the image of the polarisation operator.  ``SparseMVMatrixPoly``
stores arbitrary polynomials in at most four variables as a map from
exponent tuples to coefficient matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize

from .config import DEFAULT_BUDGET, Budget
from .errors import (BoundarySpecialization, IndexOutOfRange, KappaTooSmall, NoRootFound, PointOutsideD,
                     PreconditionViolated, ShapeMismatch, SizeCapExceeded)
from .matpoly import TAU_RANK, MatrixPolynomial, _matrix_from_json, _matrix_to_json
from .regions import DISC, HALF_PLANE, Region
from .scalarpoly import DEFAULT_TAU_BND, ComplexPolynomial, roots
from .verdicts import CERTIFIED, FALSIFIED, NOT_STABLE, UNKNOWN, HyperVerdict

MAX_KAPPA_SYMMETRIC = 16
MAX_KAPPA_SPARSE = 4
MAX_EXPONENT = 8


def elementary_symmetric_all(z: Sequence[complex]) -> np.ndarray:
    """``[s_0(z), ..., s_k(z)]`` from the coefficients of ``prod (1 + t z_i)``."""
    z = np.asarray(z, dtype=complex)
    e = np.zeros(len(z) + 1, dtype=complex)
    e[0] = 1.0
    for i, zi in enumerate(z):
        e[1:i + 2] = e[1:i + 2] + zi * e[0:i + 1]
    return e


def elementary_symmetric(j: int, z: Sequence[complex]) -> complex:
    if not 0 <= j <= len(z):
        raise IndexOutOfRange(f"j must lie in 0..{len(z)}")
    return complex(elementary_symmetric_all(z)[j])


def _elementary_symmetric_polys(ps: Sequence[ComplexPolynomial]) -> list[ComplexPolynomial]:
    e = [ComplexPolynomial([1.0])] + [ComplexPolynomial()] * len(ps)
    for i, p in enumerate(ps):
        for j in range(i + 1, 0, -1):
            e[j] = e[j] + p * e[j - 1]
    return e


# ---------------------------------------------------------------------------
# symmetric multi-affine polynomials


@dataclass(frozen=True)
class MultiAffineSymmetricMP:
    kappa: int
    levels: np.ndarray = field(repr=False)

    def __post_init__(self):
        L = np.asarray(self.levels, dtype=complex)
        if L.ndim != 3 or L.shape[1] != L.shape[2]:
            raise ShapeMismatch("levels must have shape (kappa+1, n, n)")
        if L.shape[0] != self.kappa + 1:
            raise ShapeMismatch("need exactly kappa+1 levels")
        if self.kappa > MAX_KAPPA_SYMMETRIC:
            raise SizeCapExceeded(f"kappa is capped at {MAX_KAPPA_SYMMETRIC}")
        object.__setattr__(self, "levels", L)

    @property
    def n(self) -> int:
        return self.levels.shape[1]

    def _weights(self, s: np.ndarray) -> np.ndarray:
        binom = np.array([math.comb(self.kappa, j) for j in range(self.kappa + 1)], dtype=float)
        return s / binom

    def __call__(self, z: Sequence[complex]) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.kappa,):
            raise ShapeMismatch(f"expected {self.kappa} variables")
        w = self._weights(elementary_symmetric_all(z))
        return np.tensordot(w, self.levels, axes=1)

    def partials(self, z: Sequence[complex]) -> list[np.ndarray]:
        z = np.asarray(z, dtype=complex)
        out = []
        for i in range(self.kappa):
            rest = np.delete(z, i)
            s = np.concatenate([[0.0], elementary_symmetric_all(rest)])
            out.append(np.tensordot(self._weights(s), self.levels, axes=1))
        return out

    def to_sparse(self) -> "SparseMVMatrixPoly":
        if self.kappa > MAX_KAPPA_SPARSE:
            raise SizeCapExceeded(f"sparse expansion needs kappa <= {MAX_KAPPA_SPARSE}")
        terms = {}
        for e in itertools.product((0, 1), repeat=self.kappa):
            j = sum(e)
            A = self.levels[j] / math.comb(self.kappa, j)
            if np.any(A != 0):
                terms[e] = A
        return SparseMVMatrixPoly(self.kappa, terms, self.n)

    def to_json(self) -> dict[str, Any]:
        return {"kappa": self.kappa, "n": self.n, "levels": [_matrix_to_json(A) for A in self.levels]}


def polarize(P: MatrixPolynomial, kappa: int) -> MultiAffineSymmetricMP:
    """The polarisation image; coefficients above the degree are zero."""
    if kappa < max(P.degree, 0):
        raise KappaTooSmall(f"kappa={kappa} is below the degree {P.degree}")
    if kappa > MAX_KAPPA_SYMMETRIC:
        raise SizeCapExceeded(f"kappa is capped at {MAX_KAPPA_SYMMETRIC}")
    levels = np.zeros((kappa + 1, P.n, P.n), dtype=complex)
    if not P.is_zero():
        levels[: P.degree + 1] = P.coeffs
    return MultiAffineSymmetricMP(kappa, levels)


def diagonal(Q: MultiAffineSymmetricMP) -> MatrixPolynomial:
    """Restriction to ``z_1 = ... = z_k = t``; inverse of :func:`polarize`."""
    return MatrixPolynomial(Q.levels, n=Q.n)


def compose(P: MatrixPolynomial, kappa: int, ps: Sequence[ComplexPolynomial]) -> MatrixPolynomial:
    """``Q(t) = (T_k P)(p_1(t), ..., p_k(t))``."""
    if len(ps) != kappa:
        raise ShapeMismatch("need one scalar polynomial per variable")
    Q = polarize(P, kappa)
    es = _elementary_symmetric_polys(list(ps))
    deg = max((e.degree for e in es), default=0)
    out = np.zeros((max(deg, 0) + 1, P.n, P.n), dtype=complex)
    for j, e in enumerate(es):
        if e.is_zero():
            continue
        c = e.coeffs / math.comb(kappa, j)
        out[: len(c)] += c[:, None, None] * Q.levels[j][None]
    return MatrixPolynomial(out, n=P.n)


# ---------------------------------------------------------------------------
# sparse multivariate polynomials


class SparseMVMatrixPoly:
    """Matrix polynomial in ``kappa <= 4`` variables with per-variable degree <= 8."""

    __slots__ = ("kappa", "n", "terms")

    def __init__(self, kappa: int, terms: dict, n: int | None = None):
        if not 1 <= kappa <= MAX_KAPPA_SPARSE:
            raise SizeCapExceeded(f"kappa must lie in 1..{MAX_KAPPA_SPARSE}")
        clean = {}
        for e, A in terms.items():
            e = tuple(int(t) for t in e)
            if len(e) != kappa or min(e) < 0:
                raise ShapeMismatch(f"bad exponent {e}")
            if max(e) > MAX_EXPONENT:
                raise SizeCapExceeded(f"per-variable degree is capped at {MAX_EXPONENT}")
            A = np.atleast_2d(np.asarray(A, dtype=complex))
            if n is None:
                n = A.shape[0]
            if A.shape != (n, n):
                raise ShapeMismatch("coefficient matrices must be n x n")
            if np.any(A != 0):
                clean[e] = clean.get(e, 0) + A
        if n is None:
            raise ShapeMismatch("n is required for the zero polynomial")
        self.kappa = kappa
        self.n = int(n)
        self.terms = {e: A for e, A in sorted(clean.items()) if np.any(A != 0)}

    @classmethod
    def from_entries(cls, kappa: int, entries: Sequence[Sequence[dict]]) -> "SparseMVMatrixPoly":
        """Build from a table of scalar term maps ``{exponent: coefficient}``."""
        n = len(entries)
        terms: dict = {}
        for i, row in enumerate(entries):
            for j, cell in enumerate(row):
                for e, c in cell.items():
                    A = terms.setdefault(tuple(e), np.zeros((n, n), dtype=complex))
                    A[i, j] += c
        return cls(kappa, terms, n)

    @classmethod
    def scalar(cls, kappa: int, terms: dict) -> "SparseMVMatrixPoly":
        return cls(kappa, {e: np.array([[c]]) for e, c in terms.items()}, 1)

    def __call__(self, z: Sequence[complex]) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros((self.n, self.n), dtype=complex)
        for e, A in self.terms.items():
            out += np.prod(z ** np.array(e)) * A
        return out

    def horner(self, z: Sequence[complex]) -> np.ndarray:
        """Evaluation by nested Horner in the last variable; independent of ``__call__``."""
        z = np.asarray(z, dtype=complex)

        def rec(terms: dict, k: int) -> np.ndarray:
            if k == 0:
                return terms.get((), np.zeros((self.n, self.n), dtype=complex))
            groups: dict = {}
            for e, A in terms.items():
                groups.setdefault(e[-1], {})[e[:-1]] = A
            top = max(groups) if groups else 0
            acc = np.zeros((self.n, self.n), dtype=complex)
            for p in range(top, -1, -1):
                acc = acc * z[k - 1]
                if p in groups:
                    acc = acc + rec(groups[p], k - 1)
            return acc

        return rec(dict(self.terms), self.kappa)

    def partial_derivative(self, j: int) -> "SparseMVMatrixPoly":
        """Termwise derivative in the variable ``z_j`` (1-based)."""
        if not 1 <= j <= self.kappa:
            raise IndexOutOfRange(f"j must lie in 1..{self.kappa}")
        out = {}
        for e, A in self.terms.items():
            if e[j - 1] > 0:
                f = list(e)
                f[j - 1] -= 1
                out[tuple(f)] = e[j - 1] * A
        return SparseMVMatrixPoly(self.kappa, out, self.n)

    def partials(self, z: Sequence[complex]) -> list[np.ndarray]:
        return [self.partial_derivative(j)(z) for j in range(1, self.kappa + 1)]

    def entry(self, i: int, j: int) -> "SparseMVMatrixPoly":
        return SparseMVMatrixPoly.scalar(self.kappa, {e: A[i, j] for e, A in self.terms.items()})

    def degree_in(self, j: int) -> int:
        return max((e[j - 1] for e in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def entries_linearly_independent(self, tau_rank: float = TAU_RANK) -> bool:
        if not self.terms:
            return False
        M = np.array([A.ravel() for A in self.terms.values()]).T
        s = np.linalg.svd(M, compute_uv=False)
        return int(np.sum(s > tau_rank * s[0])) == self.n * self.n

    def is_upper_triangular(self) -> bool:
        return all(not np.any(np.tril(A, -1)) for A in self.terms.values())

    def permute(self, perm: Sequence[int]) -> "SparseMVMatrixPoly":
        """``Q(z_{p(1)}, ..., z_{p(k)})`` for a 0-based permutation ``perm``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.kappa)):
            raise ValueError("perm must be a permutation of 0..kappa-1")
        out = {}
        for e, A in self.terms.items():
            f = [0] * self.kappa
            for i, p in enumerate(perm):
                f[p] += e[i]
            out[tuple(f)] = A
        return SparseMVMatrixPoly(self.kappa, out, self.n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMVMatrixPoly):
            return NotImplemented
        return (self.kappa, self.n) == (other.kappa, other.n) and self.terms.keys() == other.terms.keys() and all(
            np.array_equal(A, other.terms[e]) for e, A in self.terms.items())

    def allclose(self, other: "SparseMVMatrixPoly", atol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        z = np.zeros((self.n, self.n))
        return all(np.allclose(self.terms.get(e, z), other.terms.get(e, z), atol=atol, rtol=0) for e in keys)

    def __repr__(self) -> str:
        return f"SparseMVMatrixPoly(kappa={self.kappa}, n={self.n}, terms={len(self.terms)})"

    def to_json(self) -> dict[str, Any]:
        return {"kappa": self.kappa, "n": self.n,
                "terms": [{"exponent": list(e), "coeff": _matrix_to_json(A)} for e, A in self.terms.items()]}

    @classmethod
    def from_json(cls, doc: Any) -> "SparseMVMatrixPoly":
        from .errors import SchemaError
        if not isinstance(doc, dict) or "kappa" not in doc or "terms" not in doc:
            raise SchemaError("", "expected an object with 'kappa' and 'terms'")
        terms = {}
        for i, t in enumerate(doc["terms"]):
            if not isinstance(t, dict) or "exponent" not in t or "coeff" not in t:
                raise SchemaError(f"/terms/{i}", "expected 'exponent' and 'coeff'")
            terms[tuple(t["exponent"])] = _matrix_from_json(t["coeff"], f"/terms/{i}/coeff")
        return cls(int(doc["kappa"]), terms, doc.get("n"))


def polarized_sparse(P: MatrixPolynomial, kappa: int) -> SparseMVMatrixPoly:
    return polarize(P, kappa).to_sparse()


# ---------------------------------------------------------------------------
# coincidence points


def gws_coincidence(Q: MultiAffineSymmetricMP, points: Sequence[complex], D: Region,
                    tau_bnd: float = DEFAULT_TAU_BND) -> complex:
    """A point ``z0`` in D with ``Q(z0, ..., z0) = Q(points)`` for scalar Q."""
    if Q.n != 1:
        raise ShapeMismatch("coincidence points are defined for scalar polynomials")
    if D.kind not in (DISC, HALF_PLANE):
        raise PreconditionViolated("the domain must be a disc or a half-plane")
    pts = np.asarray(points, dtype=complex)
    if pts.shape != (Q.kappa,):
        raise ShapeMismatch(f"expected {Q.kappa} points")
    if not np.all(D.contains_array(pts, tau_bnd)):
        raise PointOutsideD("every point must lie in D")
    target = complex(Q(pts)[0, 0])
    g = ComplexPolynomial(Q.levels[:, 0, 0]) - ComplexPolynomial([target])
    if g.degree <= 0:
        if g.is_zero():
            return complex(pts[0])
        raise NoRootFound("the diagonal restriction is a nonzero constant")
    rs = roots(g).roots
    margins = D.margins(rs)
    ok = D.contains_array(rs, tau_bnd)
    if not ok.any():
        raise NoRootFound("no coincidence root found within tolerance (numerical failure)")
    idx = np.flatnonzero(ok)
    return complex(rs[idx[np.argmax(margins[idx])]])


# ---------------------------------------------------------------------------
# stability over product regions


@dataclass(frozen=True)
class MVStability:
    status: str                      # "falsified" or "unknown_positive"
    witness: np.ndarray | None = None
    sigma_min: float | None = None
    samples_used: int = 0
    best_start: int | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status, "samples_used": self.samples_used}
        if self.witness is not None:
            out["witness"] = [[float(w.real), float(w.imag)] for w in self.witness]
            out["sigma_min"] = self.sigma_min
        if self.best_start is not None:
            out["best_start"] = self.best_start
        return out


def _det_grad(M: np.ndarray, dMs: Sequence[np.ndarray]) -> np.ndarray:
    n = M.shape[0]
    out = np.zeros(len(dMs), dtype=complex)
    for i, dM in enumerate(dMs):
        for k in range(n):
            X = M.copy()
            X[:, k] = dM[:, k]
            out[i] += np.linalg.det(X)
    return out


def _relative_sigma(M: np.ndarray) -> float:
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[-1] / max(1.0, s[0]))


def _in_product(D_list: Sequence[Region], w: np.ndarray, tau_bnd: float = 0.0) -> bool:
    # within tau_bnd (1 + |z|) of a boundary the closed flag decides
    return all(D.contains(complex(z), tau_bnd * (1.0 + abs(z))) for D, z in zip(D_list, w))


def _newton_polish(Q, D_list, w: np.ndarray, bound: float, iters: int = 60) -> np.ndarray:
    for _ in range(iters):
        M = Q(w)
        f = np.linalg.det(M)
        if abs(f) == 0:
            break
        g = _det_grad(M, Q.partials(w))
        gn = float(np.vdot(g, g).real)
        if gn == 0:
            break
        step = -f * np.conj(g) / gn
        wn = w + step
        if not np.all(np.isfinite(wn)) or np.max(np.abs(wn)) > bound or not _in_product(D_list, wn):
            break
        w = wn
        if np.linalg.norm(step) <= 1e-15 * (1.0 + np.linalg.norm(w)):
            break
    return w


def mv_stable(Q, D_list: Sequence[Region], budget: Budget = DEFAULT_BUDGET, seed: int = 0,
              tol: float = 1e-10) -> MVStability:
    """Search for a singular point of Q inside the product region.

    Stability over a product region means ``det Q(w) != 0`` for every w in
    it.  The search minimizes the relative smallest singular value from
    multistarts at radii ``2^k`` and polishes with Newton steps on det.
    Only falsification is conclusive.
    """
    D_list = list(D_list)
    if len(D_list) != Q.kappa:
        raise ShapeMismatch("one region per variable is required")
    rng = np.random.default_rng(seed)
    k = Q.kappa
    samples = 0
    best = (np.inf, None, None)

    def to_w(v, R):
        u = v[:k] + 1j * v[k:]
        return np.array([D.from_plane_bounded(ui, R) for D, ui in zip(D_list, u)], dtype=complex)

    start = 0
    for level in range(budget.radius_levels):
        R = 2.0 ** level

        def obj(v):
            nonlocal samples
            samples += 1
            return _relative_sigma(Q(to_w(v, R)))

        for _ in range(max(1, budget.det_min_starts // budget.radius_levels)):
            v0 = rng.standard_normal(2 * k)
            res = minimize(obj, v0, method="Nelder-Mead",
                           options={"maxfev": 150 * k, "xatol": 1e-12, "fatol": 1e-15})
            w = _newton_polish(Q, D_list, to_w(res.x, R), bound=4.0 * R + 4.0)
            s = _relative_sigma(Q(w))
            if _in_product(D_list, w, DEFAULT_TAU_BND) and s < best[0]:
                best = (s, w, start)
            start += 1
            if best[0] <= tol:
                return MVStability("falsified", best[1], best[0], samples, best[2])
    return MVStability("unknown_positive", None, float(best[0]), samples, best[2])


# ---------------------------------------------------------------------------
# hyperstability over product regions


def _monomial_stable(poly: SparseMVMatrixPoly, D_list: Sequence[Region]) -> bool | None:
    """Exact rule for ``c z^e``: zero-free iff some z_i with e_i > 0 avoids 0."""
    if len(poly.terms) != 1:
        return None
    (e, A), = poly.terms.items()
    if A[0, 0] == 0:
        return False
    active = [D for ei, D in zip(e, D_list) if ei > 0]
    if not active:
        return True
    return any(not D.contains(0j) for D in active)


def upper_triangular_route(Q: SparseMVMatrixPoly, D_list: Sequence[Region]) -> HyperVerdict | None:
    """Upper-triangular Q with zero-free diagonal entries over the product region."""
    if not Q.is_upper_triangular():
        return None
    checks = [_monomial_stable(Q.entry(i, i), D_list) for i in range(Q.n)]
    if all(c is True for c in checks):
        return HyperVerdict(CERTIFIED, "BlockTriangular",
                            evidence={"route": "upper-triangular", "diagonal": "monomials zero-free on D",
                                      "certificate": "for x with last nonzero entry x_r take y = e_r"})
    return None


def _scalar_from_vector(Q: SparseMVMatrixPoly, v: np.ndarray) -> SparseMVMatrixPoly:
    return SparseMVMatrixPoly.scalar(Q.kappa, {e: c for e, c in zip(Q.terms, v) if abs(c) > 0})


def _sample_sphere(rng: np.random.Generator, n: int, count: int) -> list[np.ndarray]:
    xs = [np.eye(n)[j].astype(complex) for j in range(n)]
    while len(xs) < count:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        xs.append(v / np.linalg.norm(v))
    return xs[:count]


def mv_hyperstable(Q, D_list: Sequence[Region], budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                   delegate: bool = True) -> HyperVerdict:
    """Hyperstability of a multivariate matrix polynomial over a product region.

    Routes: polarisation transfer to the univariate engine (symmetric
    multi-affine Q over a power of a disc or half-plane), the upper
    triangular rule, then directional sampling.  Sampling never certifies.
    """
    from .stability import check_hyperstable

    D_list = list(D_list)
    if delegate and isinstance(Q, MultiAffineSymmetricMP) and D_list and all(
            D == D_list[0] for D in D_list) and D_list[0].kind in (DISC, HALF_PLANE):
        inner = check_hyperstable(diagonal(Q), D_list[0], budget, seed)
        ev = {"route": "polarisation transfer", "univariate": inner.to_json()}
        if inner.status == NOT_STABLE:
            mu = complex(inner.mu)
            return HyperVerdict(NOT_STABLE, "Polarisation", mu=[mu] * Q.kappa, evidence=ev)
        return HyperVerdict(inner.status, "Polarisation", x=inner.x, evidence=ev)
    S = Q.to_sparse() if isinstance(Q, MultiAffineSymmetricMP) else Q
    if len(D_list) != S.kappa:
        raise ShapeMismatch("one region per variable is required")
    tri = upper_triangular_route(S, D_list)
    if tri is not None:
        return tri

    rng = np.random.default_rng(seed)
    small = Budget(det_min_starts=4, radius_levels=3)
    As = np.array(list(S.terms.values()))
    certs = []
    for idx, x in enumerate(_sample_sphere(rng, S.n, min(budget.x_samples, 16))):
        V = np.einsum("tij,j->it", As, x)          # n x terms; row i gives y = e_i coefficients
        U, s, Wh = np.linalg.svd(V, full_matrices=False)
        r = int(np.sum(s > TAU_RANK * max(1.0, s[0] if s.size else 0.0)))
        if r == 0:
            return HyperVerdict(FALSIFIED, "DirectionalSearch", x=x,
                                evidence={"reason": "Q(z)x vanishes identically", "rank": 0})
        if r == 1:
            g = _scalar_from_vector(S, Wh[0])
            res = mv_stable(g, D_list, small, seed + idx)
            if res.status == "falsified":
                return HyperVerdict(FALSIFIED, "DirectionalSearch", x=x,
                                    evidence={"reason": "single achievable generator has a zero in D",
                                              "rank": 1, "zero": res.witness})
            certs.append({"x_index": idx, "rank": 1})
            continue
        found = None
        cands = [np.eye(S.n)[i] for i in range(S.n)] + [U[:, 0].conj()]
        for y in cands:
            c = y.conj() @ V
            if not np.any(np.abs(c) > 0):
                continue
            if mv_stable(_scalar_from_vector(S, c), D_list, small, seed + idx).status != "falsified":
                found = y
                break
        if found is None:
            return HyperVerdict(UNKNOWN, "DirectionalSearch", x=x,
                                evidence={"reason": "no certificate found for this direction", "rank": r})
        certs.append({"x_index": idx, "rank": r, "y": found})
    return HyperVerdict(UNKNOWN, "DirectionalSearch",
                        evidence={"reading": "unknown_positive", "sampled": len(certs), "certificates": certs})


# ---------------------------------------------------------------------------
# Gauss-Lucas harness, transforms, composition


def _section_complement_convex(D_list: Sequence[Region], j: int) -> bool:
    # the j-th section of the complement is either C or C minus D_j
    return D_list[j - 1].complement_is_convex()


def mv_gauss_lucas_harness(Q: SparseMVMatrixPoly, j: int, D_list: Sequence[Region],
                           budget: Budget = DEFAULT_BUDGET, seed: int = 0) -> dict[str, Any]:
    """Check the derivative transfer in variable ``j`` over a product region."""
    if not 1 <= j <= Q.kappa:
        raise IndexOutOfRange(f"j must lie in 1..{Q.kappa}")
    if not _section_complement_convex(D_list, j):
        raise PreconditionViolated(f"complement is not separately convex in variable {j}")
    dQ = Q.partial_derivative(j)
    report: dict[str, Any] = {"j": j, "derivative_independent": dQ.entries_linearly_independent()}
    if Q.n == 1:
        base = mv_stable(Q, D_list, budget, seed)
        der = mv_stable(dQ, D_list, budget, seed) if not dQ.is_zero() else None
        report["p_status"] = base.status
        report["derivative_status"] = der.status if der else "zero"
        violations = []
        if base.status != "falsified" and der is not None and der.status == "falsified":
            violations.append(der.witness)
        report["violations"] = violations
        return report
    base = mv_hyperstable(Q, D_list, budget, seed)
    der = mv_hyperstable(dQ, D_list, budget, seed)
    report["P_status"] = base.status
    report["derivative_status"] = der.status
    report["derivative_witness_x"] = der.x
    report["transfer_applies"] = report["derivative_independent"]
    report["violations"] = [] if (not report["derivative_independent"] or base.status != CERTIFIED
                                  or der.status != FALSIFIED) else [der.x]
    return report


def basic_transform(Q: SparseMVMatrixPoly, kind: str, j: int | None = None, *, perm=None,
                    a: complex | None = None, phi: float = 0.0, tol: float = 1e-12) -> SparseMVMatrixPoly:
    """Hyperstability-preserving operations over ``H_phi^k``.

    ``permute`` (perm), ``scale`` (variable j by a > 0), ``diagonalize``
    (z_1..z_j merged into one variable), ``invert`` (variable j, with
    rotation), ``specialize`` (z_j := a with a in the open half-plane).
    """
    if kind == "permute":
        return Q.permute(perm)
    if j is None or not 1 <= j <= Q.kappa:
        raise IndexOutOfRange(f"j must lie in 1..{Q.kappa}")
    if kind == "scale":
        if a is None or complex(a).imag != 0 or complex(a).real <= 0:
            raise ValueError("scaling needs a positive real factor")
        s = complex(a).real
        return SparseMVMatrixPoly(Q.kappa, {e: A * s ** e[j - 1] for e, A in Q.terms.items()}, Q.n)
    if kind == "diagonalize":
        if j == 1:
            return Q
        out: dict = {}
        for e, A in Q.terms.items():
            f = (sum(e[:j]),) + e[j:]
            out[f] = out.get(f, 0) + A
        return SparseMVMatrixPoly(Q.kappa - j + 1, out, Q.n)
    if kind == "invert":
        d = Q.degree_in(j)
        c = -np.exp(-2j * phi)
        out = {}
        for e, A in Q.terms.items():
            f = list(e)
            f[j - 1] = d - e[j - 1]
            f = tuple(f)
            out[f] = out.get(f, 0) + A * c ** e[j - 1]
        return SparseMVMatrixPoly(Q.kappa, out, Q.n)
    if kind == "specialize":
        if a is None:
            raise ValueError("specialization needs a value")
        m = (complex(a) * np.exp(1j * phi)).imag
        if abs(m) <= tol:
            raise BoundarySpecialization("specializing at a boundary point does not preserve hyperstability")
        if m < 0:
            raise PreconditionViolated("the specialization value must lie in the open half-plane")
        if Q.kappa == 1:
            raise ValueError("cannot remove the only variable")
        out = {}
        for e, A in Q.terms.items():
            f = e[: j - 1] + e[j:]
            out[f] = out.get(f, 0) + A * complex(a) ** e[j - 1]
        return SparseMVMatrixPoly(Q.kappa - 1, out, Q.n)
    raise ValueError(f"unknown transform {kind!r}")


@dataclass(frozen=True)
class CompositionReport:
    Q: MatrixPolynomial
    source: HyperVerdict
    certified: bool
    eigen_violations: list
    region: str

    def to_json(self) -> dict[str, Any]:
        return {"Q": self.Q.to_json(), "source": self.source.to_json(), "certified": self.certified,
                "eigen_violations": [[complex(z).real, complex(z).imag] for z in self.eigen_violations],
                "region": self.region}


def compose_and_check(P: MatrixPolynomial, kappa: int, ps: Sequence[ComplexPolynomial], D: Region,
                      budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                      source: HyperVerdict | None = None) -> CompositionReport:
    """Hyperstability of ``Q = (T_k P)(p_1, ..., p_k)`` on the preimage set.

    Certified whenever P is certified hyperstable on the disc or half-plane
    D.  Every finite eigenvalue mu of Q is checked not to satisfy
    ``p_i(mu) in D`` for all i.
    """
    from .matpoly import eigenvalues
    from .stability import check_hyperstable

    if D.kind not in (DISC, HALF_PLANE):
        raise PreconditionViolated("the domain must be a disc or a half-plane")
    Q = compose(P, kappa, ps)
    src = source if source is not None else check_hyperstable(P, D, budget, seed)
    bad = []
    ev = eigenvalues(Q)
    for mu in ev.finite:
        if all(D.contains(complex(p(mu)), 1e-8) for p in ps):
            bad.append(complex(mu))
    desc = " and ".join(f"p_{i + 1}(t) in D" for i in range(kappa))
    return CompositionReport(Q, src, src.certified and not bad, bad, f"{{t : {desc}}}, D = {D.describe()}")


def tkappa2_cross_check(P: MatrixPolynomial, kappa: int, D: Region, budget: Budget = DEFAULT_BUDGET,
                        seed: int = 0) -> dict[str, Any]:
    """Compare the univariate verdict with the direct multivariate search."""
    from .stability import check_hyperstable

    uni = check_hyperstable(P, D, budget, seed)
    multi = mv_hyperstable(polarize(P, kappa), [D] * kappa, budget, seed, delegate=False)
    decided = {CERTIFIED: True, FALSIFIED: False, NOT_STABLE: False}
    a, b = decided.get(uni.status), decided.get(multi.status)
    return {"univariate": uni.status, "multivariate": multi.status,
            "agree": None if a is None or b is None else a == b}
