"""Stability and hyperstability of univariate matrix polynomials.

``check_hyperstable`` runs a layered pipeline where the first conclusive
layer wins.  Certificates come only from theorem-backed routes; sampling
can falsify (through exact algebraic obstructions) or gather evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize

from .config import DEFAULT_BUDGET, Budget
from .errors import (HypothesisViolated, NotBlockTriangular, PreconditionViolated, ShapeMismatch,
                     VariantPreconditionViolated)
from .matpoly import (TAU_RANK, MatrixPolynomial, common_kernel_dim, eigenvalues,
                      entries_linearly_independent, hermitian_part, is_hermitian, is_psd, is_skew, norms,
                      skew_part, span_rank)
from .numrange import wp_disjoint_from
from .regions import DISC, DISC_EXTERIOR, HALF_PLANE, SECTOR, Region, H
from .scalarpoly import DEFAULT_TAU_BND, ComplexPolynomial, classify_roots, roots, stability_margins, stability_report
from .verdicts import CERTIFIED, FALSIFIED, NOT_STABLE, STABLE_ONLY, UNKNOWN, HyperVerdict

VIETA_TOL = 1e-8
LSQ_TOL = 1e-10
SLACK = 1e-8


# ---------------------------------------------------------------------------
# stability


@dataclass(frozen=True)
class StableCheck:
    status: str                      # "stable" | "not_stable" | "singular"
    mu: complex | None = None
    boundary_sensitive: bool = False

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status, "boundary_sensitive": self.boundary_sensitive}
        if self.mu is not None:
            out["mu"] = [self.mu.real, self.mu.imag]
        return out


def check_stable(P: MatrixPolynomial, D: Region, tau_bnd: float = DEFAULT_TAU_BND) -> StableCheck:
    """Stable iff det P is not identically zero and has no root in D.

    Eigenvalues at infinity never count since D lies in the finite plane.
    """
    ev = eigenvalues(P)
    if not ev.regular:
        return StableCheck("singular")
    fin = ev.finite
    if fin.size == 0:
        return StableCheck("stable")
    inside, sens = classify_roots(fin, D, tau_bnd)
    sensitive = bool(sens.any())
    if inside.any():
        m = D.margins(fin)
        k = int(np.argmax(np.where(inside, m, -np.inf)))
        return StableCheck("not_stable", complex(fin[k]), sensitive)
    return StableCheck("stable", None, sensitive)


# ---------------------------------------------------------------------------
# directional certificates


@dataclass(frozen=True)
class DirectionalProblem:
    """Achievable coefficient vectors ``c_j = y* A_j x`` for a fixed x."""

    x: np.ndarray
    V: np.ndarray                     # n x (d+1), columns A_j x
    S: np.ndarray                     # (d+1) x r orthonormal basis of {V^T w}
    r: int

    @classmethod
    def build(cls, P: MatrixPolynomial, x: np.ndarray, tau_rank: float = TAU_RANK) -> "DirectionalProblem":
        x = np.asarray(x, dtype=complex)
        nx = np.linalg.norm(x)
        if nx == 0:
            raise ValueError("x must be nonzero")
        x = x / nx
        V = np.einsum("jab,b->aj", P.coeffs, x)
        U, s, _ = np.linalg.svd(V.T, full_matrices=False)
        top = s[0] if s.size else 0.0
        r = int(np.sum(s > tau_rank * max(top, 1.0))) if top > 0 else 0
        return cls(x, V, U[:, :r], r)

    def y_for(self, c: np.ndarray) -> np.ndarray:
        """Reconstruct y with ``y* V = c`` by least squares on ``V^T w = c``."""
        w, *_ = np.linalg.lstsq(self.V.T, c, rcond=None)
        y = np.conj(w)
        resid = np.linalg.norm(y.conj() @ self.V - c)
        if resid > LSQ_TOL * max(1.0, np.linalg.norm(c)):
            raise ArithmeticError("coefficient vector is not achievable")
        return y / np.linalg.norm(y)


@dataclass(frozen=True)
class DirectionalResult:
    status: str                       # "certificate" | "no_certificate" | "unknown"
    y: np.ndarray | None = None
    proof: str | None = None
    margin: float | None = None
    r: int = 0

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status, "r": self.r}
        if self.y is not None:
            out["y"] = [[float(v.real), float(v.imag)] for v in self.y]
        if self.proof:
            out["proof"] = self.proof
        if self.margin is not None:
            out["margin"] = self.margin
        return out


def _robustly_stable(p: ComplexPolynomial, D: Region, tau: float) -> bool:
    if p.is_zero():
        return False
    rep = stability_report(p, D, tau)
    return rep.stable and not rep.boundary_sensitive


def _common_roots(polys: Sequence[ComplexPolynomial], tol: float = 1e-7) -> np.ndarray:
    nz = [p for p in polys if not p.is_zero()]
    if not nz or any(p.degree == 0 for p in nz):
        return np.zeros(0, dtype=complex)
    base = min(nz, key=lambda p: p.degree)
    cand = roots(base).roots
    keep = []
    for z in cand:
        scale = max(1.0, abs(z)) ** max(p.degree for p in nz)
        if all(abs(p(z)) <= tol * scale * np.max(np.abs(p.coeffs)) for p in nz):
            keep.append(z)
    return np.asarray(keep, dtype=complex)


def _deflate(p: ComplexPolynomial, z: complex) -> ComplexPolynomial:
    c = p.coeffs[::-1]
    q = np.zeros(len(c) - 1, dtype=complex)
    acc = 0j
    for i in range(len(c) - 1):
        acc = acc * z + c[i]
        q[i] = acc
    return ComplexPolynomial(q[::-1])


def vieta_obstruction(S: np.ndarray, D: Region, tol: float = VIETA_TOL) -> str | None:
    """Exact proof that every achievable polynomial has a zero in the disc D.

    After the substitution ``lambda = c + rho mu`` the basis polynomials are
    stripped of their common zeros (a common zero in D already proves the
    claim).  If then every achievable polynomial satisfies ``a_0 = omega a_m``
    where m is the top degree, the product of its m roots has modulus
    ``|omega|``, so ``|omega| <= 1`` forces a root in the closed unit disc
    (``< 1`` for the open disc); a vanishing ``a_m`` forces the root 0.
    """
    if D.kind != DISC or S.shape[1] == 0:
        return None
    c0, rho = D.center, D.radius
    basis = []
    for k in range(S.shape[1]):
        p = ComplexPolynomial(S[:, k])
        basis.append(_substitute(p, rho, c0))
    common = _common_roots(basis)
    for z in common:
        if D.contains(c0 + rho * z) or abs(z) <= 1.0 + (tol if D.closed else -tol):
            if abs(z) < 1.0 - tol or (D.closed and abs(z) <= 1.0 + tol):
                return "vieta: common zero of all achievable polynomials in D"
    for z in common:
        basis = [_deflate(p, z) if not p.is_zero() else p for p in basis]
    m = max(p.degree for p in basis)
    if m < 1:
        return None
    a0 = np.array([p.coeff(0) for p in basis])
    am = np.array([p.coeff(m) for p in basis])
    if np.linalg.norm(am) == 0:
        return None
    omega = complex(np.vdot(am, a0) / np.vdot(am, am))
    if np.linalg.norm(a0 - omega * am) > tol * max(1.0, np.linalg.norm(a0), np.linalg.norm(am)):
        return None
    if abs(omega) <= 1.0 + tol if D.closed else abs(omega) < 1.0 - tol:
        return f"vieta: root product modulus {abs(omega):.6g} forces a zero in D"
    return None


def _substitute(p: ComplexPolynomial, alpha: complex, beta: complex) -> ComplexPolynomial:
    """``p(beta + alpha mu)`` as a polynomial in mu."""
    out = ComplexPolynomial()
    lin = ComplexPolynomial([beta, alpha])
    for a in p.coeffs[::-1]:
        out = out * lin + ComplexPolynomial([a])
    return out


def _sphere_params(k: int) -> np.ndarray:
    """Fibonacci points on the Riemann sphere, stereographically projected (inf kept last)."""
    i = np.arange(k) + 0.5
    zc = 1.0 - 2.0 * i / k
    th = np.pi * (1.0 + 5.0 ** 0.5) * i
    rr = np.sqrt(1.0 - zc ** 2)
    return rr * (np.cos(th) + 1j * np.sin(th)) / (1.0 - zc)


def _best_margin(C: np.ndarray, D: Region) -> tuple[np.ndarray, int]:
    m = stability_margins(C, D)
    return m, int(np.argmax(m))


def directional_certificate(P: MatrixPolynomial, x: np.ndarray, D: Region, budget: Budget = DEFAULT_BUDGET,
                            seed: int = 0, tau_bnd: float = DEFAULT_TAU_BND) -> DirectionalResult:
    """Search a y making ``y* P(lambda) x`` free of zeros in D."""
    prob = DirectionalProblem.build(P, x)
    r = prob.r
    if r == 0:
        return DirectionalResult("no_certificate", proof="P(lambda)x vanishes identically", r=0)
    S = prob.S

    def certify(c: np.ndarray, margin: float | None = None) -> DirectionalResult | None:
        p = ComplexPolynomial(c)
        if _robustly_stable(p, D, tau_bnd):
            try:
                y = prob.y_for(c)
            except ArithmeticError:
                return None
            q = ComplexPolynomial(y.conj() @ prob.V)
            if _robustly_stable(q, D, tau_bnd):
                return DirectionalResult("certificate", y=y, margin=margin, r=r)
        return None

    if r == 1:
        res = certify(S[:, 0])
        if res is not None:
            return res
        return DirectionalResult("no_certificate", proof="single generator has a zero in D", r=1)

    obstruction = vieta_obstruction(S, D)
    if obstruction is not None:
        return DirectionalResult("no_certificate", proof=obstruction, r=r)

    rng = np.random.default_rng(seed)
    # structured candidates: y = e_i, y = x, and the dominant left singular directions
    n = P.n
    ys = [np.eye(n)[i] for i in range(n)] + [prob.x]
    cands = [y.conj() @ prob.V for y in ys]
    if r == 2:
        t = _sphere_params(budget.sphere_grid)
        C = S[:, 0][None, :] + t[:, None] * S[:, 1][None, :]
        C = np.vstack([np.array(cands), C, S[:, 1][None, :]])
    else:
        W = rng.standard_normal((max(512, 16 * r), r)) + 1j * rng.standard_normal((max(512, 16 * r), r))
        C = np.vstack([np.array(cands), W @ S.T])
    m, k = _best_margin(C, D)
    order = np.argsort(-m)[:8]
    for idx in order:
        if m[idx] <= 0:
            break
        res = certify(C[idx], float(m[idx]))
        if res is not None:
            return res

    def neg_margin(v):
        w = v[:r] + 1j * v[r:]
        val = stability_margins((S @ w)[None, :], D)[0]
        return -val if np.isfinite(val) else (1e6 if val < 0 else -1e6)

    best = None
    starts = budget.y_starts if r >= 3 else 4
    for s in range(starts):
        if s < len(order):
            w0, *_ = np.linalg.lstsq(S, C[order[s]], rcond=None)
        else:
            w0 = rng.standard_normal(r) + 1j * rng.standard_normal(r)
        res = minimize(neg_margin, np.concatenate([w0.real, w0.imag]), method="Nelder-Mead",
                       options={"maxfev": 80 * r, "xatol": 1e-10, "fatol": 1e-12})
        if best is None or res.fun < best[0]:
            best = (res.fun, res.x, s)
        if res.fun < 0:
            w = res.x[:r] + 1j * res.x[r:]
            out = certify(S @ w, float(-res.fun))
            if out is not None:
                return out
    return DirectionalResult("unknown", proof="no certificate found", margin=float(-best[0]) if best else None, r=r)


# ---------------------------------------------------------------------------
# structural routes


def _is_pencil_form(P: MatrixPolynomial) -> bool:
    return span_rank(list(P.coeffs)) <= 2


def _upper_split(P: MatrixPolynomial, tol: float = 1e-14) -> int | None:
    """Smallest k with P[k:, :k] identically zero, if any."""
    c = P.coeffs
    scale = max(1.0, float(np.max(np.abs(c))))
    for k in range(1, P.n):
        if np.max(np.abs(c[:, k:, :k])) <= tol * scale:
            return k
    return None


def block_triangular_certificate(P: MatrixPolynomial, blocks: Sequence[Sequence[int]] | None, D: Region,
                                 S: np.ndarray | None = None, T: np.ndarray | None = None,
                                 budget: Budget = DEFAULT_BUDGET, seed: int = 0) -> HyperVerdict:
    """Hyperstability from a block upper-triangular form ``P = S B T``.

    ``blocks`` lists the index ranges of the diagonal blocks (contiguous,
    covering 0..n-1).  Each diagonal block is checked recursively.
    """
    n = P.n
    S = np.eye(n) if S is None else np.asarray(S, dtype=complex)
    T = np.eye(n) if T is None else np.asarray(T, dtype=complex)
    if S.shape != (n, n) or T.shape != (n, n):
        raise ShapeMismatch("S and T must be n x n")
    if blocks is None:
        blocks = [[i] for i in range(n)]
    flat = [i for b in blocks for i in b]
    if flat != list(range(n)):
        raise ShapeMismatch("blocks must be contiguous and cover every index in order")
    condS, condT = float(np.linalg.cond(S)), float(np.linalg.cond(T))
    B = MatrixPolynomial(np.linalg.solve(S, P.coeffs) @ np.linalg.inv(T), n=n)
    scale = max(1.0, float(np.max(np.abs(P.coeffs))))
    for bi, rows in enumerate(blocks):
        for cols in blocks[:bi]:
            sub = B.coeffs[:, rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]
            if np.max(np.abs(sub)) > 1e-10 * scale * max(condS, condT):
                raise NotBlockTriangular("entries below the diagonal blocks do not vanish")
    subs = []
    for b in blocks:
        Pb = B.block(b, b)
        v = check_hyperstable(Pb, D, budget, seed)
        subs.append(v)
    ev = {"blocks": [list(b) for b in blocks], "cond_S": condS, "cond_T": condT,
          "diagonal": [v.to_json() for v in subs]}
    if all(v.certified for v in subs):
        return HyperVerdict(CERTIFIED, "BlockTriangular", evidence=ev)
    bad = next((v for v in subs if v.status == NOT_STABLE), None)
    if bad is not None:
        return HyperVerdict(NOT_STABLE, "BlockTriangular", mu=bad.mu, evidence=ev)
    return HyperVerdict(UNKNOWN, "BlockTriangular", evidence=ev)


def _shift(P: MatrixPolynomial, c: complex) -> MatrixPolynomial:
    return P.substitute_affine(1.0, c) if c != 0 else P


def _subadd(P: MatrixPolynomial, D: Region) -> dict | None:
    """Norm tests for quadratics on discs and disc exteriors."""
    if P.degree > 2 or D.kind not in (DISC, DISC_EXTERIOR):
        return None
    Q = _shift(P, D.center)
    A0, A1, A2 = Q.coeff(0), Q.coeff(1), Q.coeff(2)
    r = D.radius
    n1, n2 = norms(A1).two_norm, norms(A2).two_norm
    if D.kind == DISC:
        lhs, rhs = r * n1 + r * r * n2, norms(A0).sigma_min
        if lhs < rhs:
            return {"route": "subadd", "lhs": lhs, "rhs": rhs}
        return None
    # exterior: the reversal satisfies the disc test on radius 1/r
    lhs, rhs = r * n1 + norms(A0).two_norm, r * r * norms(A2).sigma_min
    if lhs < rhs:
        return {"route": "subadd2 via reversal on the closed disc of radius 1/r", "lhs": lhs, "rhs": rhs}
    return None


def _bivariate(A: Sequence[np.ndarray], family: str, variant: str):
    from .multipoly import SparseMVMatrixPoly
    if family == "poly2":
        A0, A1, A2 = A
        terms = {"a": {(2, 0): A2, (0, 1): A1, (0, 0): A0},
                 "b": {(1, 1): A2, (0, 1): A1, (0, 0): A0},
                 "c": {(2, 1): A2, (2, 0): A1, (0, 1): A0}}[variant]
    else:
        A0, A1, A2 = A
        terms = {"a": {(3, 3): A0, (3, 0): A0, (0, 3): A0, (2, 3): A2, (2, 0): A2, (3, 1): A1, (0, 1): A1,
                       (0, 0): A0},
                 "b": {(0, 3): A0, (1, 1): A2, (0, 1): A1, (0, 0): A0},
                 "c": {(1, 3): A0, (1, 2): A2, (0, 2): A1, (1, 0): A0}}[variant]
    merged: dict = {}
    for e, M in terms.items():
        merged[e] = merged.get(e, 0) + np.asarray(M, dtype=complex)
    return SparseMVMatrixPoly(2, merged, np.asarray(A0).shape[0])


def bivariate_form(P: MatrixPolynomial, family: str, variant: str):
    """The bivariate polynomial attached to a quadratic (poly2) or palindromic-end cubic (poly3)."""
    if family == "poly2":
        return _bivariate([P.coeff(0), P.coeff(1), P.coeff(2)], "poly2", variant)
    return _bivariate([P.coeff(0), P.coeff(1), P.coeff(2)], "poly3", variant)


def _halfplane_pullback(D: Region) -> tuple[complex, complex] | None:
    """(alpha, beta) with ``mu in H_{pi/2}`` iff ``alpha mu + beta in D`` for half-plane D."""
    if D.kind != HALF_PLANE:
        return None
    rot = complex(math.cos(D.phi), math.sin(D.phi))
    return 1j / rot, 1j * D.offset / rot


def _enclosing_halfplane(D: Region) -> Region:
    """D itself for half-planes; for a sector of opening at most pi, the half-plane around its bisector."""
    if D.kind == SECTOR and D.arg_hi - D.arg_lo <= math.pi:
        theta = 0.5 * (D.arg_lo + D.arg_hi)
        E = Region.half_plane(math.pi / 2 - theta)
        if D.subset_of(E):
            return E
    return D


def _halfplane_hypotheses(A0, A1, A2, tol: float = 1e-10) -> str | None:
    """Return the first failing clause of the half-plane theorem, or None."""
    if not is_psd(A2, tol):
        return "R2 psd"
    if not is_psd(hermitian_part(A1), tol):
        return "R1 psd"
    if not is_psd(A0, tol):
        return "R0 psd"
    if common_kernel_dim([A0, hermitian_part(A1), A2, skew_part(A1)]) > 0:
        return "kernel"
    return None


def _ker_hypotheses(R3, R2, R1, A0, G, variant: str, tol: float = 1e-10) -> str | None:
    for name, M in (("R3 psd", R3), ("R2 psd", R2), ("R1 psd", R1)):
        if not is_psd(M, tol):
            return name
    if not is_hermitian(A0, tol):
        return "A0 hermitian"
    if variant == "iii" and not is_psd(A0, tol):
        return "A0 psd"
    if not is_skew(G, tol):
        return "G skew"
    if not is_psd(hermitian_part(-1j * G), tol):
        return "-iG psd"
    if common_kernel_dim([G, A0, R1, R2, R3]) > 0:
        return "kernel"
    return None


KER_SECTORS = {"i": math.pi / 6, "ii": math.pi / 3, "iii": math.pi / 4}
POLY3_KER = {"a": "i", "b": "ii", "c": "iii"}


def _poly_variant_pre(family: str, variant: str, D: Region) -> None:
    if variant not in ("a", "b", "c"):
        raise ValueError("variant must be a, b or c")
    if variant in ("b", "c") and D.contains(0j):
        raise VariantPreconditionViolated(f"{family}({variant}) needs 0 outside D")
    if family == "poly3" and variant == "a":
        for z in (-1.0, complex(0.5, -math.sqrt(3) / 2), complex(0.5, math.sqrt(3) / 2)):
            if D.contains(z):
                raise VariantPreconditionViolated("poly3(a) needs the cube roots of -1 outside D")


def poly2_route(A2, A1, A0, D: Region, variant: str = "a", budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                search: bool = True) -> HyperVerdict:
    """Hyperstability of ``t^2 A2 + t A1 + A0`` through bivariate stability."""
    _poly_variant_pre("poly2", variant, D)
    P = MatrixPolynomial([A0, A1, A2])
    tag = f"Poly2({variant})"
    ev: dict[str, Any] = {}
    if variant == "a":
        sub = _subadd(P, D)
        if sub is not None:
            return HyperVerdict(CERTIFIED, tag, evidence=sub)
    if variant == "b":
        if D.subset_of(H(math.pi / 2)):
            bad = _halfplane_hypotheses(P.coeff(0), P.coeff(1), P.coeff(2))
            if bad is None:
                return HyperVerdict(CERTIFIED, tag, evidence={"route": "half-plane hypotheses"})
            ev["half_plane_failed"] = bad
    if search:
        from .multipoly import mv_stable
        Q = bivariate_form(P, "poly2", variant)
        res = mv_stable(Q, [D, D], budget, seed)
        ev["bivariate"] = res.to_json()
    return HyperVerdict(UNKNOWN, tag, evidence=ev)


def poly3_route(A2, A1, A0, D: Region, variant: str = "b", budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                A3=None, search: bool = True) -> HyperVerdict:
    """Hyperstability of ``t^3 A0 + t^2 A2 + t A1 + A0`` through bivariate stability."""
    if A3 is not None and not np.allclose(A3, A0, atol=1e-12 * max(1.0, np.max(np.abs(A0)))):
        raise ShapeMismatch("the leading coefficient must equal the constant coefficient")
    _poly_variant_pre("poly3", variant, D)
    P = MatrixPolynomial([A0, A1, A2, A0])
    tag = f"Poly3({variant})"
    ev: dict[str, Any] = {}
    kv = POLY3_KER[variant]
    sector = Region.sector(0.0, KER_SECTORS[kv])
    if D.subset_of(sector):
        n = P.n
        bad = _ker_hypotheses(A0, A2, A1, A0, np.zeros((n, n)), kv)
        if bad is None:
            return HyperVerdict(CERTIFIED, tag, evidence={"route": f"kernel theorem ({kv})",
                                                           "sector": [0.0, KER_SECTORS[kv]]})
        ev["kernel_theorem_failed"] = bad
    if search:
        from .multipoly import mv_stable
        Q = bivariate_form(P, "poly3", variant)
        res = mv_stable(Q, [D, D], budget, seed)
        ev["bivariate"] = res.to_json()
    return HyperVerdict(UNKNOWN, tag, evidence=ev)


def structured_halfplane(R2, R1, R0, J, tol: float = 1e-10) -> HyperVerdict:
    """``t^2 R2 + t (J + R1) + R0`` on the open right half-plane."""
    R2, R1, R0, J = (np.asarray(M, dtype=complex) for M in (R2, R1, R0, J))
    for name, M in (("R2 psd", R2), ("R1 psd", R1), ("R0 psd", R0)):
        if not is_psd(M, tol):
            raise HypothesisViolated(name, "matrix is not Hermitian positive semidefinite")
    if np.linalg.norm(J + J.conj().T) > tol * max(1.0, np.linalg.norm(J)):
        raise HypothesisViolated("J skew", "J + J* is not zero")
    if common_kernel_dim([R0, R1, R2, J]) > 0:
        raise HypothesisViolated("kernel", "R0, R1, R2 and J share a kernel vector")
    P = MatrixPolynomial([R0, J + R1, R2])
    ev = eigenvalues(P)
    worst = float(np.max(ev.finite.real)) if ev.finite.size else -np.inf
    return HyperVerdict(CERTIFIED, "HalfPlaneStructured",
                        evidence={"region": H(math.pi / 2).to_json(), "max_real_eigenvalue": worst,
                                  "cross_check": bool(worst <= SLACK)})


def _deg3_match(P: MatrixPolynomial, tol: float = 1e-10) -> bool:
    if P.degree != 3:
        return False
    A1, A2 = P.coeff(1), P.coeff(2)
    return bool(np.linalg.norm(A1 - A2) <= tol * max(1.0, np.linalg.norm(A1)))


def _boundary_shift(Q: MatrixPolynomial) -> float | None:
    """Real t making the constant coefficient of ``Q(mu + i t)`` Hermitian.

    Shifting along the imaginary axis maps the right half-plane onto itself,
    and for a quadratic only ``skew(A0) + i t herm(A1)`` is non-Hermitian.
    """
    K, H1 = skew_part(Q.coeff(0)), hermitian_part(Q.coeff(1))
    den = float(np.vdot(H1, H1).real)
    if den == 0.0:
        return None
    t = -float(np.vdot(1j * H1, K).real) / den
    return t if t != 0.0 else None


DEG3_REGION = Region.sector(-math.pi / 4, math.pi / 4)


def _structured_layer(P: MatrixPolynomial, D: Region) -> HyperVerdict | None:
    if P.degree == 2:
        maps = []
        if D.subset_of(H(math.pi / 2)):
            maps.append((1.0, 0j))
        pb = _halfplane_pullback(_enclosing_halfplane(D))
        if pb is not None and pb != (1.0, 0j):
            maps.append(pb)
        for alpha, beta in maps:
            Q = P.substitute_affine(alpha, beta)
            if _halfplane_hypotheses(Q.coeff(0), Q.coeff(1), Q.coeff(2)) is None:
                return HyperVerdict(CERTIFIED, "HalfPlaneStructured",
                                    evidence={"substitution": [complex(alpha), complex(beta)]})
            t = _boundary_shift(Q)
            if t is not None:
                Qt = Q.substitute_affine(1.0, 1j * t)
                if _halfplane_hypotheses(Qt.coeff(0), Qt.coeff(1), Qt.coeff(2)) is None:
                    return HyperVerdict(CERTIFIED, "HalfPlaneStructured",
                                        evidence={"substitution": [complex(alpha), complex(beta) + 1j * t * alpha]})
    if _deg3_match(P) and D.subset_of(DEG3_REGION):
        R0, M, R2 = P.coeff(0), P.coeff(1), P.coeff(2 + 1)
        if _halfplane_hypotheses(R0, 2 * M, R2) is None:
            return HyperVerdict(CERTIFIED, "Polarisation",
                                evidence={"route": "quadratic half-plane polynomial composed with (t^2, t)"})
    return None


# ---------------------------------------------------------------------------
# the pipeline


def _sample_directions(rng: np.random.Generator, n: int, k: int) -> list[np.ndarray]:
    xs = [np.eye(n, dtype=complex)[i] for i in range(n)]
    while len(xs) < max(k, n):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        xs.append(v / np.linalg.norm(v))
    return xs


def check_hyperstable(P: MatrixPolynomial, D: Region, budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                      tau_bnd: float = DEFAULT_TAU_BND) -> HyperVerdict:
    """Layered semi-decision of hyperstability of P on D."""
    st = check_stable(P, D, tau_bnd)
    if st.status == "singular":
        return HyperVerdict(NOT_STABLE, None, mu=D.interior_point(),
                            evidence={"reason": "det P vanishes identically"})
    if st.status == "not_stable":
        return HyperVerdict(NOT_STABLE, None, mu=st.mu, evidence={"reason": "eigenvalue in D"})
    base = {"stable": st.to_json()}

    if _is_pencil_form(P):
        return HyperVerdict(CERTIFIED, "PencilForm",
                            evidence={**base, "reason": "coefficients span at most two matrices"})

    k = _upper_split(P)
    if k is not None:
        top = check_hyperstable(P.block(range(k), range(k)), D, budget, seed, tau_bnd)
        bot = check_hyperstable(P.block(range(k, P.n), range(k, P.n)), D, budget, seed, tau_bnd)
        if top.certified and bot.certified:
            return HyperVerdict(CERTIFIED, "BlockTriangular",
                                evidence={**base, "split": k, "diagonal": [top.to_json(), bot.to_json()]})

    nr = wp_disjoint_from(P, D, budget, seed)
    if nr.status == "disjoint" and nr.label == "proven":
        return HyperVerdict(CERTIFIED, "NumericalRange", evidence={**base, "numrange": nr.to_json()})
    base["numrange"] = nr.status

    if P.degree == 2:
        sub = _subadd(P, D)
        if sub is not None:
            return HyperVerdict(CERTIFIED, "Poly2(a)", evidence={**base, **sub})
    if P.degree == 3 and np.allclose(P.coeff(3), P.coeff(0), atol=1e-12 * max(1.0, np.max(np.abs(P.coeffs)))):
        for variant in ("b", "c", "a"):
            try:
                v = poly3_route(P.coeff(2), P.coeff(1), P.coeff(0), D, variant, budget, seed, search=False)
            except VariantPreconditionViolated:
                continue
            if v.certified:
                return HyperVerdict(CERTIFIED, v.method, evidence={**base, **v.evidence})

    sv = _structured_layer(P, D)
    if sv is not None:
        return HyperVerdict(CERTIFIED, sv.method, evidence={**base, **sv.evidence})

    return _directional_search(P, D, budget, seed, tau_bnd, base)


def _directional_search(P: MatrixPolynomial, D: Region, budget: Budget, seed: int, tau_bnd: float,
                        base: dict) -> HyperVerdict:
    rng = np.random.default_rng(seed)
    xs = _sample_directions(rng, P.n, budget.x_samples)
    trail = []
    unknown_x = None
    margins = []
    for idx, x in enumerate(xs):
        res = directional_certificate(P, x, D, budget, seed + idx, tau_bnd)
        if res.status == "no_certificate":
            return HyperVerdict(FALSIFIED, "DirectionalSearch", x=DirectionalProblem.build(P, x).x,
                                evidence={**base, "proof": res.proof, "rank": res.r, "x_index": idx,
                                          "directions_tried": idx + 1})
        if res.status == "unknown":
            unknown_x = unknown_x if unknown_x is not None else x
            margins.append(-np.inf)
        else:
            trail.append({"x": x, "y": res.y})
            margins.append(res.margin if res.margin is not None else 0.0)
    # adversarial refinement around the directions with the weakest certificates
    order = np.argsort(margins)[:4]
    for rank_i, i in enumerate(order):
        x0 = xs[i]
        for t in range(2 * P.n):
            j = t % P.n
            step = (0.5 / (1 + t // P.n)) * np.exp(2j * np.pi * rng.random())
            x = x0.copy()
            x[j] += step
            if np.linalg.norm(x) == 0:
                continue
            res = directional_certificate(P, x, D, budget, seed + 1000 + rank_i * 97 + t, tau_bnd)
            if res.status == "no_certificate":
                return HyperVerdict(FALSIFIED, "DirectionalSearch", x=DirectionalProblem.build(P, x).x,
                                    evidence={**base, "proof": res.proof, "rank": res.r, "adversarial": True})
            if res.status == "unknown" and unknown_x is None:
                unknown_x = x
            elif res.status == "certificate":
                trail.append({"x": x, "y": res.y})
    if unknown_x is not None:
        return HyperVerdict(UNKNOWN, "DirectionalSearch",
                            evidence={**base, "reason": "no certificate found for some direction",
                                      "direction": unknown_x, "certificates": len(trail)})
    return HyperVerdict(STABLE_ONLY, "DirectionalSearch",
                        evidence={**base, "reading": "unknown_positive",
                                  "note": "no falsifier found; certificates for all sampled directions",
                                  "certificates": len(trail), "trail": trail[: P.n + 4]})


# ---------------------------------------------------------------------------
# structured theorems with direct conclusions


def _eig_finite(P: MatrixPolynomial) -> np.ndarray:
    return eigenvalues(P).finite


def structured_corollaries(kind: str, **kw) -> HyperVerdict:
    """Theorem-backed conclusions for structured families.

    ``cube`` (A=[A_0..A_d] PSD), ``quad`` (A0, A1, A2), ``mgt`` (a, b, c, R),
    ``c_hp`` (R, J, Q, A0, A2), ``ker`` (R1, R2, R3, A0, G, variant),
    ``deg3`` (R0, R1, R2, J), ``pencil`` (R0, R1, J, a).
    """
    tol = kw.get("tol", 1e-10)
    if kind == "cube":
        As = [np.asarray(A, dtype=complex) for A in kw["A"]]
        for i, A in enumerate(As):
            if not is_psd(A, tol):
                raise HypothesisViolated(f"A_{i} psd", "coefficient is not positive semidefinite")
        d = len(As) - 1
        if d < 1:
            raise HypothesisViolated("degree", "degree must be at least 1")
        P = MatrixPolynomial(As)
        ev = _eig_finite(P)
        ok = bool(np.all((np.abs(np.angle(ev)) >= math.pi / d - SLACK) | (np.abs(ev) <= SLACK)))
        D = Region.sector(-math.pi / d, math.pi / d) if d > 1 else Region.sector(-math.pi, math.pi, closed=True)
        return HyperVerdict(STABLE_ONLY, "Structured",
                            evidence={"theorem": "psd coefficients", "stable_on": D.to_json(),
                                      "cross_check": ok, "eigenvalues": ev})
    if kind == "quad":
        A0, A1, A2 = (np.asarray(kw[k], dtype=complex) for k in ("A0", "A1", "A2"))
        for name, M in (("A0 psd", A0), ("A2 psd", A2), ("Re A1 psd", hermitian_part(A1))):
            if not is_psd(M, tol):
                raise HypothesisViolated(name, "matrix is not positive semidefinite")
        ev = _eig_finite(MatrixPolynomial([A0, A1, A2]))
        ok = bool(np.all(ev.real <= SLACK))
        return HyperVerdict(STABLE_ONLY, "Structured",
                            evidence={"theorem": "dissipative quadratic", "stable_on": H(math.pi / 2).to_json(),
                                      "cross_check": ok, "eigenvalues": ev})
    if kind == "mgt":
        a, b, c = float(kw["a"]), float(kw["b"]), float(kw["c"])
        R = np.asarray(kw["R"], dtype=complex)
        if not a > 1:
            raise HypothesisViolated("a>1", f"a = {a}")
        if not b > c:
            raise HypothesisViolated("b>c", f"b = {b}, c = {c}")
        if not c >= 0:
            raise HypothesisViolated("c>=0", "c < 0 gives a positive real eigenvalue")
        if not (is_hermitian(R, tol) and np.linalg.eigvalsh(hermitian_part(R))[0] > tol):
            raise HypothesisViolated("R pd", "R is not Hermitian positive definite")
        n = R.shape[0]
        I = np.eye(n)
        P = MatrixPolynomial([c * R, b * R, a * I, I])
        v = check_hyperstable(P, H(math.pi / 2), kw.get("budget", DEFAULT_BUDGET), kw.get("seed", 0))
        ev = _eig_finite(P)
        ok = bool(np.all(ev.real <= SLACK))
        return HyperVerdict(v.status, v.method, mu=v.mu,
                            evidence={**v.evidence, "cross_check": ok, "polynomial": P.to_json()})
    if kind == "c_hp":
        R, J, Qm, A0, A2 = (np.asarray(kw[k], dtype=complex) for k in ("R", "J", "Q", "A0", "A2"))
        Qh = Qm.conj().T
        for name, M in (("R psd", R), ("Q*A2 psd", Qh @ A2), ("Q*A0 psd", Qh @ A0)):
            if not is_psd(M, tol):
                raise HypothesisViolated(name, "matrix is not Hermitian positive semidefinite")
        if not is_skew(J, tol):
            raise HypothesisViolated("J skew", "J + J* is not zero")
        if common_kernel_dim([Qh @ A0, Qh @ R @ Qm, Qh @ J @ Qm, Qh @ A2]) > 0:
            raise HypothesisViolated("kernel", "the four matrices share a kernel vector")
        P = MatrixPolynomial([A0, (J + R) @ Qm, A2])
        ev = _eig_finite(P)
        return HyperVerdict(CERTIFIED, "HalfPlaneStructured",
                            evidence={"route": "left factor Q*", "cross_check": bool(np.all(ev.real <= SLACK)),
                                      "polynomial": P.to_json()})
    if kind == "ker":
        variant = kw.get("variant", "ii")
        R1, R2, R3, A0, G = (np.asarray(kw[k], dtype=complex) for k in ("R1", "R2", "R3", "A0", "G"))
        bad = _ker_hypotheses(R3, R2, R1, A0, G, variant, tol)
        if bad is not None:
            raise HypothesisViolated(bad, "kernel theorem hypothesis fails")
        from .multipoly import mv_stable
        fam = {"i": "a", "ii": "b", "iii": "c"}[variant]
        Bq = _ker_bivariate(R3, R2, R1, A0 + G, fam)
        Dk = Region.sector(0.0, KER_SECTORS[variant])
        spot = mv_stable(Bq, [Dk, Dk], kw.get("budget", Budget(det_min_starts=8, radius_levels=4)),
                         kw.get("seed", 0))
        P = MatrixPolynomial([A0 + G, R1, R2, R3])
        ev = _eig_finite(P)
        D3 = Region.sector(0.0, math.pi / 3)
        inside = D3.contains_array(ev, SLACK) if ev.size else np.zeros(0, bool)
        ev_json = {"theorem": f"kernel ({variant})", "bivariate_region": Dk.to_json(),
                   "spot_falsifier": spot.status, "stable_on": D3.to_json(),
                   "cross_check": bool(not inside.any()) and spot.status != "falsified"}
        if np.allclose(R3, A0 + G, atol=tol):
            return HyperVerdict(CERTIFIED, f"Poly3({fam})", evidence={**ev_json, "hyperstable_on": Dk.to_json()})
        return HyperVerdict(STABLE_ONLY, "Structured", evidence=ev_json)
    if kind == "deg3":
        R0, R1, R2, J = (np.asarray(kw[k], dtype=complex) for k in ("R0", "R1", "R2", "J"))
        for name, M in (("R0 psd", R0), ("R1 psd", R1), ("R2 psd", R2)):
            if not is_psd(M, tol):
                raise HypothesisViolated(name, "matrix is not Hermitian positive semidefinite")
        if not is_skew(J, tol):
            raise HypothesisViolated("J skew", "J + J* is not zero")
        if common_kernel_dim([R0, R1, R2, J]) > 0:
            raise HypothesisViolated("kernel", "R0, R1, R2 and J share a kernel vector")
        from .multipoly import compose_and_check
        P2 = MatrixPolynomial([R0, 2 * (R1 + J), R2])
        src = structured_halfplane(R2, 2 * R1, R0, 2 * J)
        rep = compose_and_check(P2, 2, [ComplexPolynomial([0, 0, 1]), ComplexPolynomial([0, 1])],
                                H(math.pi / 2), source=src)
        return HyperVerdict(CERTIFIED if rep.certified else UNKNOWN, "Polarisation",
                            evidence={"hyperstable_on": DEG3_REGION.to_json(), "excluding_zero": True,
                                      "cross_check": not rep.eigen_violations, "polynomial": rep.Q.to_json()})
    if kind == "pencil":
        R0, R1, J = (np.asarray(kw[k], dtype=complex) for k in ("R0", "R1", "J"))
        a = float(kw["a"])
        if a < 0:
            raise HypothesisViolated("a>=0", f"a = {a}")
        for name, M in (("R0 psd", R0), ("R1 psd", R1)):
            if not is_psd(M, tol):
                raise HypothesisViolated(name, "matrix is not Hermitian positive semidefinite")
        if not is_skew(J, tol):
            raise HypothesisViolated("J skew", "J + J* is not zero")
        ev = _eig_finite(MatrixPolynomial([R0 + a * J, R1 + J]))
        return HyperVerdict(STABLE_ONLY, "Structured",
                            evidence={"theorem": "dissipative pencil", "stable_on": H(math.pi / 2).to_json(),
                                      "cross_check": bool(np.all(ev.real <= SLACK))})
    raise ValueError(f"unknown corollary {kind!r}")


def _ker_bivariate(R3, R2, R1, C, fam: str):
    from .multipoly import SparseMVMatrixPoly
    terms = {"a": [((3, 3), R3), ((3, 0), R3), ((0, 3), R3), ((2, 3), R2), ((2, 0), R2), ((3, 1), R1),
                   ((0, 1), R1), ((0, 0), C)],
             "b": [((0, 3), R3), ((1, 1), R2), ((0, 1), R1), ((0, 0), C)],
             "c": [((1, 3), R3), ((1, 2), R2), ((0, 2), R1), ((1, 0), C)]}[fam]
    merged: dict = {}
    for e, M in terms:
        merged[e] = merged.get(e, 0) + M
    return SparseMVMatrixPoly(2, merged, C.shape[0])


# ---------------------------------------------------------------------------
# derivative transfer


@dataclass(frozen=True)
class TransferReport:
    convex_complement: bool
    derivative_independent: bool
    P: HyperVerdict
    P_prime_stable: StableCheck
    P_prime: HyperVerdict | None
    checks: list = field(default_factory=list)
    inconsistencies: list = field(default_factory=list)
    reading: str = ""

    def to_json(self) -> dict[str, Any]:
        return {"preconditions": {"convex_complement": self.convex_complement,
                                  "derivative_independent": self.derivative_independent},
                "P": self.P.to_json(), "P_prime_stable": self.P_prime_stable.to_json(),
                "P_prime": self.P_prime.to_json() if self.P_prime else None,
                "checks": len(self.checks), "inconsistencies": self.inconsistencies, "reading": self.reading}


def gauss_lucas_transfer(P: MatrixPolynomial, D: Region, budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                         strict: bool = True) -> TransferReport:
    """Derivative transfer of hyperstability on regions with convex complement.

    With ``strict`` a failed precondition raises; otherwise it is reported.
    Every certificate y found for P is re-checked on ``y* P'(t) x``.
    """
    convex = D.complement_is_convex()
    dP = P.derivative()
    indep = entries_linearly_independent(dP)
    if strict and not convex:
        raise PreconditionViolated("the complement of D is not convex")
    if strict and not indep:
        raise PreconditionViolated("entries of the derivative are linearly dependent")
    vP = check_hyperstable(P, D, budget, seed)
    stP = check_stable(dP, D)
    vdP = check_hyperstable(dP, D, budget, seed) if not dP.is_zero() else None
    checks, bad = [], []
    for item in vP.evidence.get("trail", []) if isinstance(vP.evidence, dict) else []:
        x, y = item["x"], item["y"]
        q = ComplexPolynomial(np.einsum("jab,a,b->j", dP.coeffs, y.conj(), x))
        ok = (not q.is_zero()) and stability_report(q, D).stable
        checks.append(ok)
        if not ok and convex and indep:
            bad.append({"x": [[float(v.real), float(v.imag)] for v in x]})
    if convex and indep and stP.status != "stable":
        reading = "P is not hyperstable: the derivative has an eigenvalue in D"
    elif convex and indep:
        reading = "transfer applies"
    elif stP.status != "stable":
        reading = ("derivative not stable; preconditions fail so no conclusion on P follows"
                   if not (convex and indep) else "")
    else:
        reading = "preconditions fail; no transfer claimed"
    if vP.certified and convex and indep and stP.status != "stable":
        bad.append({"reason": "certified P with unstable derivative"})
    return TransferReport(convex, indep, vP, stP, vdP, checks, bad, reading)
