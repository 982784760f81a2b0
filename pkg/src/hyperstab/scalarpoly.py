"""Univariate complex polynomials: roots, region stability and scalar checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (ConstantDerivative, ConstantPolynomial, DegreeTooLarge,
                     NotNormalized, SchemaError, ZeroPolynomial)
from .regions import Region

MAX_DEGREE = 64
ABERTH_MAX_ITER = 200
ABERTH_STEP_TOL = 1e-14
TAU_HULL = 1e-8
TAU_VIETA = 1e-8
DEFAULT_TAU_BND = 1e-9
EPS = np.finfo(float).eps


class ComplexPolynomial:
    """Dense polynomial with ascending complex coefficients ``a_0 .. a_d``.

    Trailing exact zeros are trimmed, so the zero polynomial has an empty
    coefficient array and degree -1.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Sequence[complex] | np.ndarray = ()):
        c = np.array(coeffs, dtype=complex).reshape(-1)
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:0]
        c.setflags(write=False)
        self._c = c

    @classmethod
    def from_roots(cls, roots: Sequence[complex], leading: complex = 1.0) -> "ComplexPolynomial":
        c = np.array([1.0 + 0j])
        for r in roots:
            c = npoly.polymul(c, np.array([-r, 1.0], dtype=complex))
        return cls(leading * c)

    @classmethod
    def monomial(cls, k: int, coeff: complex = 1.0) -> "ComplexPolynomial":
        c = np.zeros(k + 1, dtype=complex)
        c[k] = coeff
        return cls(c)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return self._c.size - 1

    def is_zero(self) -> bool:
        return self._c.size == 0

    def coeff(self, j: int) -> complex:
        return complex(self._c[j]) if 0 <= j < self._c.size else 0j

    def __call__(self, z):
        """Horner evaluation, vectorized over ``z``."""
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for a in self._c[::-1]:
            acc = acc * z + a
        return acc if acc.ndim else complex(acc)

    def derivative(self) -> "ComplexPolynomial":
        if self._c.size <= 1:
            return ComplexPolynomial()
        return ComplexPolynomial(self._c[1:] * np.arange(1, self._c.size))

    def __add__(self, other: "ComplexPolynomial") -> "ComplexPolynomial":
        return ComplexPolynomial(npoly.polyadd(self._pad(), _as_poly(other)._pad()))

    def __sub__(self, other: "ComplexPolynomial") -> "ComplexPolynomial":
        return ComplexPolynomial(npoly.polysub(self._pad(), _as_poly(other)._pad()))

    def __mul__(self, other) -> "ComplexPolynomial":
        if isinstance(other, ComplexPolynomial):
            if self.is_zero() or other.is_zero():
                return ComplexPolynomial()
            return ComplexPolynomial(npoly.polymul(self._c, other._c))
        return ComplexPolynomial(self._c * complex(other))

    __rmul__ = __mul__

    def __neg__(self) -> "ComplexPolynomial":
        return ComplexPolynomial(-self._c)

    def __eq__(self, other) -> bool:
        return isinstance(other, ComplexPolynomial) and np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash(self._c.tobytes())

    def allclose(self, other: "ComplexPolynomial", atol: float = 1e-12) -> bool:
        n = max(self._c.size, other._c.size)
        a = np.zeros(n, dtype=complex)
        b = np.zeros(n, dtype=complex)
        a[: self._c.size] = self._c
        b[: other._c.size] = other._c
        return bool(np.allclose(a, b, atol=atol, rtol=0))

    def _pad(self) -> np.ndarray:
        return self._c if self._c.size else np.zeros(1, dtype=complex)

    def __repr__(self) -> str:
        return f"ComplexPolynomial({self._c.tolist()})"

    def to_json(self) -> dict[str, Any]:
        return {"coeffs": [[float(a.real), float(a.imag)] for a in self._c]}

    @classmethod
    def from_json(cls, doc: Any) -> "ComplexPolynomial":
        if not isinstance(doc, dict) or "coeffs" not in doc:
            raise SchemaError("", "expected an object with a 'coeffs' array")
        return cls([_complex_from_json(c, f"/coeffs/{k}") for k, c in enumerate(doc["coeffs"])])


def _as_poly(p) -> ComplexPolynomial:
    return p if isinstance(p, ComplexPolynomial) else ComplexPolynomial([p])


def _complex_from_json(v: Any, pointer: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
        return complex(v[0], v[1])
    raise SchemaError(pointer, "complex numbers are [re, im] pairs")


# ---------------------------------------------------------------------------
# roots


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    backward_errors: np.ndarray
    method: str

    def to_json(self) -> dict[str, Any]:
        return {"roots": [[float(r.real), float(r.imag)] for r in self.roots],
                "backward_errors": [float(e) for e in self.backward_errors],
                "method": self.method}


def backward_errors(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Normwise relative backward error ``|p(z)| / sum |a_j||z|^j``."""
    z = np.asarray(z, dtype=complex)
    num = np.abs(npoly.polyval(z, c))
    den = npoly.polyval(np.abs(z), np.abs(c))
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def _aberth(b: np.ndarray) -> tuple[np.ndarray, bool]:
    """Aberth-Ehrlich iteration for a monic polynomial with b[0] != 0."""
    d = b.size - 1
    radius = 1.0 + float(np.max(np.abs(b[:-1])))
    z = radius * np.exp(1j * (2.0 * np.pi * np.arange(d) / d + 0.4))
    db = b[1:] * np.arange(1, d + 1)
    done = np.zeros(d, dtype=bool)
    for _ in range(ABERTH_MAX_ITER):
        pz = npoly.polyval(z, b)
        dpz = npoly.polyval(z, db)
        dpz = np.where(dpz == 0, EPS, dpz)
        ratio = pz / dpz
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        denom = 1.0 - ratio * inv.sum(axis=1)
        denom = np.where(denom == 0, EPS, denom)
        w = np.where(done, 0.0, ratio / denom)
        z = z - w
        small = np.abs(w) <= ABERTH_STEP_TOL * (1.0 + np.abs(z))
        done |= small | (backward_errors(b, z) <= 4 * EPS)
        if done.all():
            return z, True
    return z, bool(done.all())


def _companion_roots(b: np.ndarray) -> np.ndarray:
    d = b.size - 1
    comp = np.zeros((d, d), dtype=complex)
    comp[1:, :-1] = np.eye(d - 1)
    comp[:, -1] = -b[:-1]
    return np.linalg.eigvals(comp)


def _polish_simple(b: np.ndarray, z: np.ndarray, steps: int = 8) -> np.ndarray:
    """Newton steps on roots whose backward error is not yet at working precision."""
    z = z.copy()
    db = npoly.polyder(b)
    for i in np.flatnonzero(backward_errors(b, z) > 1e-13):
        w = z[i]
        for _ in range(steps):
            den = npoly.polyval(w, db)
            if den == 0:
                break
            cand = w - npoly.polyval(w, b) / den
            if not np.isfinite(cand) or backward_errors(b, np.array([cand]))[0] >= backward_errors(b, np.array([w]))[0]:
                break
            w = cand
        z[i] = w
    return z


def _has_cluster(z: np.ndarray) -> bool:
    rad = 16.0 * EPS ** (1.0 / min(z.size, 8)) * (1.0 + np.abs(z))
    gap = np.abs(z[:, None] - z[None, :]) + np.diag(np.full(z.size, np.inf))
    return bool(np.any(gap <= rad[:, None]))


def _vieta_gap(b: np.ndarray, z: np.ndarray) -> float:
    d = b.size - 1
    s = abs(np.sum(z) + b[-2])
    pr = abs(np.prod(z) - (-1) ** d * b[0]) / (1.0 + float(np.prod(np.maximum(1.0, np.abs(z)))))
    return max(s / (1.0 + float(np.max(np.abs(b)))), pr)


def roots(p: ComplexPolynomial) -> RootSet:
    """All roots with multiplicity, Aberth-Ehrlich with a companion fallback."""
    if p.is_zero():
        raise ZeroPolynomial("the zero polynomial has no finite root set")
    if p.degree == 0:
        raise ConstantPolynomial("a nonzero constant has no roots")
    if p.degree > MAX_DEGREE:
        raise DegreeTooLarge(f"degree {p.degree} exceeds {MAX_DEGREE}")
    c = p.coeffs
    k = int(np.flatnonzero(c)[0])
    core = c[k:]
    d = core.size - 1
    found = np.zeros(0, dtype=complex)
    method = "exact"
    if d == 1:
        found = np.array([-core[0] / core[1]])
    elif d > 1:
        a = core / core[-1]
        log_s = math.log(abs(a[0])) / d
        s = math.exp(log_s)
        with np.errstate(divide="ignore"):
            mag = np.log(np.abs(a))
        b = np.exp(mag + (np.arange(d + 1) - d) * log_s) * np.exp(1j * np.angle(a))
        b[-1] = 1.0
        z, ok = _aberth(b)
        cands = [("aberth", z)] if np.all(np.isfinite(z)) else []
        clustered = bool(cands) and _has_cluster(z)
        if not ok or not cands or np.max(backward_errors(b, z)) > 1e-10 or clustered:
            # clustered roots: Aberth roots are individually but not jointly backward stable
            for zc in (_companion_roots(b), _companion_roots(a) / s):
                zc = _polish_simple(b, zc)
                if np.all(np.isfinite(zc)):
                    cands.append(("companion", zc))
        errs = [float(np.max(backward_errors(b, zc))) for _, zc in cands]
        good = [i for i, e in enumerate(errs) if e <= 1e-10]
        if good and (clustered or len(good) > 1):
            pick = min(good, key=lambda i: (_vieta_gap(b, cands[i][1]), errs[i]))
        else:
            pick = int(np.argmin(errs))
        method, z = cands[pick]
        found = z * s
    allr = np.concatenate([np.zeros(k, dtype=complex), found])
    order = np.lexsort((allr.imag, allr.real))
    allr = allr[order]
    return RootSet(allr, backward_errors(c, allr), method)


def vieta_residuals(p: ComplexPolynomial, rs: RootSet) -> tuple[float, float]:
    """Relative residuals of the sum and product relations."""
    c = p.coeffs
    d = p.degree
    scale = 1.0 + float(np.max(np.abs(c / c[-1])))
    s = abs(np.sum(rs.roots) + c[-2] / c[-1])
    prod = abs(np.prod(rs.roots) - (-1) ** d * c[0] / c[-1])
    pscale = 1.0 + float(np.prod(np.maximum(1.0, np.abs(rs.roots))))
    return s / scale, prod / pscale


# ---------------------------------------------------------------------------
# stability


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    boundary_sensitive: bool
    offending: complex | None


def cluster_tolerances(rs: np.ndarray, tau_bnd: float) -> np.ndarray:
    """Per-root boundary slack: a k-fold root is only accurate to ~eps^(1/k)."""
    rs = np.asarray(rs, dtype=complex)
    tol = np.full(rs.shape, float(tau_bnd))
    for i, z in enumerate(rs):
        k = int(np.sum(np.abs(rs - z) <= 1e-3 * (1.0 + abs(z))))
        if k > 1:
            tol[i] = max(tau_bnd, 8.0 * EPS ** (1.0 / k) * (1.0 + abs(z)))
    return tol


def classify_roots(rs: np.ndarray, D: Region, tau_bnd: float) -> tuple[np.ndarray, np.ndarray]:
    """(inside, boundary_sensitive) masks using cluster-aware slack."""
    rs = np.asarray(rs, dtype=complex)
    tol = cluster_tolerances(rs, tau_bnd)
    m = D.margins(rs)
    inside = np.array([D.contains(z, t) for z, t in zip(rs, tol)], dtype=bool)
    sensitive = (np.abs(m) <= tol) & (tol > 0)
    return inside, sensitive


def stability_report(p: ComplexPolynomial, D: Region, tau_bnd: float = DEFAULT_TAU_BND) -> StabilityReport:
    if p.is_zero():
        raise ZeroPolynomial("stability of the zero polynomial is undefined")
    if p.degree == 0:
        return StabilityReport(True, False, None)
    rs = roots(p).roots
    inside, sens = classify_roots(rs, D, tau_bnd)
    sensitive = bool(sens.any())
    if inside.any():
        return StabilityReport(False, sensitive, complex(rs[np.argmax(inside)]))
    return StabilityReport(True, sensitive, None)


def is_stable(p: ComplexPolynomial, D: Region, tau_bnd: float = DEFAULT_TAU_BND) -> bool:
    """True iff no root of ``p`` lies in ``D`` (constants are always stable)."""
    return stability_report(p, D, tau_bnd).stable


def palindromic_quadratic_stable(a: complex, b: complex) -> bool:
    """H_0-stability of ``a z^2 + b z + a``: b/a real with modulus at least 2."""
    if a == 0:
        raise ValueError("a must be nonzero")
    mu = complex(b) / complex(a)
    return abs(mu.imag) <= 1e-14 * max(1.0, abs(mu)) and abs(mu.real) >= 2.0


def stability_margins(C: np.ndarray, D: Region, rel_trim: float = 1e-13) -> np.ndarray:
    """Batch screening: for each coefficient row, min over roots of -margin.

    Positive means every root lies strictly outside ``D``.  Nonzero constants
    give +inf and zero rows give -inf.  Intended for searches; decisions are
    re-verified with :func:`is_stable`.
    """
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    m, L = C.shape
    out = np.empty(m)
    mags = np.abs(C)
    rowmax = mags.max(axis=1)
    keep = mags > rel_trim * rowmax[:, None]
    deg = np.where(keep.any(axis=1), L - 1 - np.argmax(keep[:, ::-1], axis=1), -1)
    out[deg < 0] = -np.inf
    out[deg == 0] = np.inf
    for d in np.unique(deg[deg >= 1]):
        idx = np.flatnonzero(deg == d)
        rows = np.where(keep[idx, : d + 1], C[idx, : d + 1], 0)
        monic = rows / rows[:, d:d + 1]
        comp = np.zeros((idx.size, d, d), dtype=complex)
        if d > 1:
            comp[:, np.arange(1, d), np.arange(d - 1)] = 1.0
        comp[:, :, -1] = -monic[:, :d]
        with np.errstate(all="ignore"):
            ev = np.linalg.eigvals(comp)
        vals = -D.margins(ev)
        if D.kind == "sector":
            vals = np.where(ev == 0, -np.pi if D.contains_zero else np.pi, vals)
        out[idx] = vals.min(axis=1)
    return out


# ---------------------------------------------------------------------------
# Gauss-Lucas and de Branges


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull of complex points, counter-clockwise."""
    pts = sorted({(float(z.real), float(z.imag)) for z in np.asarray(points, dtype=complex)})
    if len(pts) <= 2:
        return np.array([complex(x, y) for x, y in pts])

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for q in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    upper: list = []
    for q in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    hull = lower[:-1] + upper[:-1]
    return np.array([complex(x, y) for x, y in hull])


def _segment_distance(z: complex, a: complex, b: complex) -> float:
    ab = b - a
    if ab == 0:
        return abs(z - a)
    t = ((z - a) * ab.conjugate()).real / abs(ab) ** 2
    t = min(1.0, max(0.0, t))
    return abs(z - (a + t * ab))


def hull_distance(z: complex, hull: np.ndarray) -> float:
    """Distance from ``z`` to the convex polygon ``hull`` (0 inside)."""
    k = hull.size
    if k == 1:
        return abs(z - hull[0])
    if k == 2:
        return _segment_distance(z, hull[0], hull[1])
    inside = True
    for i in range(k):
        a, b = hull[i], hull[(i + 1) % k]
        if ((b - a).conjugate() * (z - a)).imag < 0:
            inside = False
            break
    if inside:
        return 0.0
    return min(_segment_distance(z, hull[i], hull[(i + 1) % k]) for i in range(k))


def gauss_lucas_check(p: ComplexPolynomial, tau_hull: float = TAU_HULL) -> bool:
    """Every critical point lies in the (inflated) convex hull of the roots."""
    if p.degree < 2:
        raise ConstantDerivative("degree >= 2 is required")
    hull = convex_hull(roots(p).roots)
    crit = roots(p.derivative()).roots
    scale = 1.0 + float(np.max(np.abs(hull)))
    return all(hull_distance(z, hull) <= tau_hull * scale for z in crit)


def de_branges_margin(p: ComplexPolynomial, lam: complex) -> float:
    """``exp(re(a1 z) + (|a1|^2 - 2 re a2)|z|^2 / 2) - |p(z)|``."""
    if p.is_zero() or abs(p.coeff(0) - 1.0) > 1e-12:
        raise NotNormalized("p(0) must equal 1")
    a1, a2 = p.coeff(1), p.coeff(2)
    lam = complex(lam)
    expo = (a1 * lam).real + 0.5 * (abs(a1) ** 2 - 2.0 * a2.real) * abs(lam) ** 2
    if expo > 700.0:
        return math.inf
    return math.exp(expo) - abs(p(lam))


# ---------------------------------------------------------------------------
# transforms


def transform(p: ComplexPolynomial, kind: str, param: float | None = None) -> ComplexPolynomial:
    """Stability-preserving transforms: ``scale`` a>0, ``invert_rotate`` phi, ``differentiate``."""
    if p.is_zero():
        raise ZeroPolynomial("transforms need a nonzero polynomial")
    c = p.coeffs
    if kind == "scale":
        a = float(param)
        if not a > 0:
            raise ValueError("scale factor must be positive")
        return ComplexPolynomial(c * a ** np.arange(c.size))
    if kind == "invert_rotate":
        w = -np.exp(-2j * float(param))
        return ComplexPolynomial((c * w ** np.arange(c.size))[::-1])
    if kind == "differentiate":
        return p.derivative()
    raise ValueError(f"unknown transform {kind!r}")


def random_stable_polynomial(rng: np.random.Generator, degree: int) -> ComplexPolynomial:
    """Random H_0-stable polynomial with ``p(0) = 1``.

    Roots are uniform in ``{im z <= 0, |z| <= 2}``; root sets containing 0 are
    redrawn.
    """
    while True:
        r = 2.0 * np.sqrt(rng.random(degree))
        t = -np.pi * rng.random(degree)
        rs = r * np.exp(1j * t)
        if np.all(rs != 0):
            break
    p = ComplexPolynomial.from_roots(rs)
    return p * (1.0 / p.coeff(0))
