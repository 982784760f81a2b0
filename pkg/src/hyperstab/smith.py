"""Exact Smith canonical form over the Gaussian rationals.

Diagonal entries follow the decreasing divisibility order: ``s_{j+1}``
divides ``s_j``.  U and V are not canonical (they depend on pivot order);
S and the invariant factors are.
"""

from __future__ import annotations

import itertools
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .errors import (NotSquare, PreconditionViolated, SchemaError, ShapeMismatch, SizeCapExceeded,
                     Unrepresentable)
from .matpoly import MatrixPolynomial

MAX_SIZE = 6
MAX_DEGREE = 8
MINOR_MAX_SIZE = 4
MINOR_MAX_DEGREE = 6
EXACTIFY_DIGITS = 12
EXACTIFY_DYADIC = 2 ** 20


# ---------------------------------------------------------------------------
# scalars


def _frac(v: Any) -> Fraction:
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers")
    if isinstance(v, numbers.Rational):
        return Fraction(int(v.numerator), int(v.denominator))
    if isinstance(v, str):
        return Fraction(v.strip())
    raise TypeError(f"cannot convert {type(v).__name__} exactly")


@dataclass(frozen=True)
class GaussianRational:
    """``re + i im`` with rational parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _frac(self.re))
        object.__setattr__(self, "im", _frac(self.im))

    @classmethod
    def of(cls, v: Any) -> "GaussianRational":
        if isinstance(v, GaussianRational):
            return v
        if isinstance(v, complex):
            return cls(_exact_float(v.real), _exact_float(v.imag))
        if isinstance(v, float):
            return cls(_exact_float(v))
        return cls(_frac(v))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __add__(self, o: Any) -> "GaussianRational":
        o = GaussianRational.of(o)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, o: Any) -> "GaussianRational":
        return self + (-GaussianRational.of(o))

    def __rsub__(self, o: Any) -> "GaussianRational":
        return GaussianRational.of(o) - self

    def __mul__(self, o: Any) -> "GaussianRational":
        o = GaussianRational.of(o)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GaussianRational":
        q = self.norm2()
        if q == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(self.re / q, -self.im / q)

    def __truediv__(self, o: Any) -> "GaussianRational":
        return self * GaussianRational.of(o).inverse()

    def __eq__(self, o: Any) -> bool:
        try:
            o = GaussianRational.of(o)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def height(self) -> int:
        """Bit size of the largest numerator or denominator."""
        return max(abs(self.re.numerator).bit_length(), self.re.denominator.bit_length(),
                   abs(self.im.numerator).bit_length(), self.im.denominator.bit_length())

    def __repr__(self) -> str:
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"

    def to_json(self) -> dict[str, str]:
        return {"re": str(self.re), "im": str(self.im)}

    @classmethod
    def from_json(cls, v: Any, pointer: str = "") -> "GaussianRational":
        try:
            if isinstance(v, dict):
                if set(v) - {"re", "im"}:
                    raise SchemaError(pointer, "exact scalars only have 're' and 'im' keys")
                return cls(_frac(v.get("re", "0")), _frac(v.get("im", "0")))
            if isinstance(v, (int, str)) and not isinstance(v, bool):
                return cls(_frac(v))
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise SchemaError(pointer, f"not an exact rational: {exc}") from None
        raise SchemaError(pointer, 'exact scalars are {"re": "p/q", "im": "r/s"} objects')


ZERO = GaussianRational()
ONE = GaussianRational(1)


def _exact_float(x: float) -> Fraction:
    """Rational reconstruction of a float that is a short dyadic or decimal number."""
    if not np.isfinite(x):
        raise Unrepresentable(f"{x} is not finite")
    f = Fraction(x)
    if f.denominator <= EXACTIFY_DYADIC:
        return f
    for k in range(1, EXACTIFY_DIGITS + 1):
        g = Fraction(round(x * 10 ** k), 10 ** k)
        if abs(float(g) - x) <= 4.0 * np.finfo(float).eps * abs(x):
            return g
    raise Unrepresentable(f"{x!r} has no short exact representation; supply exact JSON input")


# ---------------------------------------------------------------------------
# polynomials


class ExactPolynomial:
    """Dense ascending coefficients; trailing exact zeros are trimmed."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Sequence[Any] = ()):
        c = [GaussianRational.of(a) for a in coeffs]
        while c and c[-1].is_zero():
            c.pop()
        self._c = tuple(c)

    @classmethod
    def monomial(cls, k: int, a: Any = 1) -> "ExactPolynomial":
        return cls([0] * k + [a])

    @property
    def coeffs(self) -> tuple[GaussianRational, ...]:
        return self._c

    @property
    def degree(self) -> int:
        """-1 for the zero polynomial."""
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return not self._c

    def is_constant(self) -> bool:
        return len(self._c) <= 1

    def coeff(self, j: int) -> GaussianRational:
        return self._c[j] if 0 <= j < len(self._c) else ZERO

    def lc(self) -> GaussianRational:
        return self._c[-1] if self._c else ZERO

    def height(self) -> int:
        return max((a.height() for a in self._c), default=0)

    def __add__(self, o: Any) -> "ExactPolynomial":
        o = _poly(o)
        k = max(len(self._c), len(o._c))
        return ExactPolynomial([self.coeff(j) + o.coeff(j) for j in range(k)])

    __radd__ = __add__

    def __neg__(self) -> "ExactPolynomial":
        return ExactPolynomial([-a for a in self._c])

    def __sub__(self, o: Any) -> "ExactPolynomial":
        return self + (-_poly(o))

    def __rsub__(self, o: Any) -> "ExactPolynomial":
        return _poly(o) - self

    def __mul__(self, o: Any) -> "ExactPolynomial":
        o = _poly(o)
        if self.is_zero() or o.is_zero():
            return ExactPolynomial()
        out = [ZERO] * (len(self._c) + len(o._c) - 1)
        for i, a in enumerate(self._c):
            if a.is_zero():
                continue
            for j, b in enumerate(o._c):
                out[i + j] = out[i + j] + a * b
        return ExactPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "ExactPolynomial":
        out = ExactPolynomial([1])
        for _ in range(k):
            out = out * self
        return out

    def __divmod__(self, o: "ExactPolynomial") -> tuple["ExactPolynomial", "ExactPolynomial"]:
        o = _poly(o)
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self._c)
        q = [ZERO] * max(len(r) - len(o._c) + 1, 0)
        inv = o.lc().inverse()
        dz = o.degree
        for k in range(len(r) - 1, dz - 1, -1):
            if r[k].is_zero():
                continue
            t = r[k] * inv
            q[k - dz] = t
            for j, b in enumerate(o._c):
                r[k - dz + j] = r[k - dz + j] - t * b
        return ExactPolynomial(q), ExactPolynomial(r[:dz] if dz > 0 else [])

    def __floordiv__(self, o: "ExactPolynomial") -> "ExactPolynomial":
        return divmod(self, o)[0]

    def __mod__(self, o: "ExactPolynomial") -> "ExactPolynomial":
        return divmod(self, o)[1]

    def divides(self, o: "ExactPolynomial") -> bool:
        """True when self | o (zero divides only zero)."""
        if self.is_zero():
            return o.is_zero()
        return (o % self).is_zero()

    def monic(self) -> "ExactPolynomial":
        if self.is_zero():
            return self
        inv = self.lc().inverse()
        return ExactPolynomial([a * inv for a in self._c])

    def __call__(self, z: Any) -> GaussianRational:
        z = GaussianRational.of(z)
        acc = ZERO
        for a in reversed(self._c):
            acc = acc * z + a
        return acc

    def __eq__(self, o: Any) -> bool:
        try:
            return self._c == _poly(o)._c
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self._c)

    def __repr__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for j, a in enumerate(self._c):
            if a.is_zero():
                continue
            terms.append(f"{a!r}" if j == 0 else f"{a!r}*t^{j}")
        return " + ".join(terms)

    def to_complex(self) -> np.ndarray:
        return np.array([complex(a) for a in self._c], dtype=complex)

    def to_json(self) -> list:
        return [a.to_json() for a in self._c]

    @classmethod
    def from_json(cls, v: Any, pointer: str = "") -> "ExactPolynomial":
        if not isinstance(v, list):
            raise SchemaError(pointer, "exact polynomials are arrays of ascending coefficients")
        return cls([GaussianRational.from_json(a, f"{pointer}/{k}") for k, a in enumerate(v)])


def _poly(v: Any) -> ExactPolynomial:
    if isinstance(v, ExactPolynomial):
        return v
    if isinstance(v, (list, tuple)):
        return ExactPolynomial(v)
    return ExactPolynomial([v])


def poly_gcd(a: ExactPolynomial, b: ExactPolynomial) -> ExactPolynomial:
    """Monic gcd (zero when both inputs vanish)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


LAMBDA = ExactPolynomial([0, 1])


# ---------------------------------------------------------------------------
# matrices


class ExactPolyMatrix:
    """m x n matrix of exact polynomials."""

    def __init__(self, rows: Sequence[Sequence[Any]]):
        rows = [[_poly(e) for e in r] for r in rows]
        if not rows or any(len(r) != len(rows[0]) for r in rows) or not rows[0]:
            raise ShapeMismatch("a non-empty rectangular array of entries is required")
        self.rows = rows

    @classmethod
    def identity(cls, n: int) -> "ExactPolyMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, entries: Sequence[Any], m: int | None = None, n: int | None = None) -> "ExactPolyMatrix":
        k = len(entries)
        m, n = m or k, n or k
        return cls([[entries[i] if i == j and i < k else 0 for j in range(n)] for i in range(m)])

    @classmethod
    def from_matrix_polynomial(cls, P: MatrixPolynomial) -> "ExactPolyMatrix":
        """Exactify a numeric polynomial; raises Unrepresentable for inexact entries."""
        c = P.coeffs
        return cls([[[complex(c[k, i, j]) for k in range(c.shape[0])] for j in range(P.n)] for i in range(P.n)])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    @property
    def degree(self) -> int:
        return max(e.degree for r in self.rows for e in r)

    def __getitem__(self, ij: tuple[int, int]) -> ExactPolynomial:
        return self.rows[ij[0]][ij[1]]

    def copy(self) -> "ExactPolyMatrix":
        return ExactPolyMatrix([list(r) for r in self.rows])

    def __matmul__(self, o: "ExactPolyMatrix") -> "ExactPolyMatrix":
        m, k = self.shape
        k2, n = o.shape
        if k != k2:
            raise ShapeMismatch(f"cannot multiply {m}x{k} by {k2}x{n}")
        out = []
        for i in range(m):
            row = []
            for j in range(n):
                acc = ExactPolynomial()
                for t in range(k):
                    a, b = self.rows[i][t], o.rows[t][j]
                    if not a.is_zero() and not b.is_zero():
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return ExactPolyMatrix(out)

    def __eq__(self, o: Any) -> bool:
        return isinstance(o, ExactPolyMatrix) and self.rows == o.rows

    def __hash__(self):
        return hash(tuple(tuple(r) for r in self.rows))

    def __repr__(self) -> str:
        return "ExactPolyMatrix(" + repr([[repr(e) for e in r] for r in self.rows]) + ")"

    def minor(self, rows: Sequence[int], cols: Sequence[int]) -> ExactPolynomial:
        return _det([[self.rows[i][j] for j in cols] for i in rows])

    def det(self) -> ExactPolynomial:
        m, n = self.shape
        if m != n:
            raise NotSquare(f"determinant of a {m}x{n} matrix")
        return _det(self.rows)

    def to_matrix_polynomial(self) -> MatrixPolynomial:
        m, n = self.shape
        if m != n:
            raise NotSquare("numeric matrix polynomials are square")
        d = max(self.degree, 0)
        C = np.zeros((d + 1, n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                c = self.rows[i][j].to_complex()
                C[: c.size, i, j] = c
        return MatrixPolynomial(C, n=n)

    def to_json(self) -> dict[str, Any]:
        m, n = self.shape
        return {"m": m, "n": n, "entries": [[e.to_json() for e in r] for r in self.rows]}

    @classmethod
    def from_json(cls, doc: Any) -> "ExactPolyMatrix":
        if not isinstance(doc, dict) or "entries" not in doc:
            raise SchemaError("", "expected an object with an 'entries' array")
        ent = doc["entries"]
        if not isinstance(ent, list) or not ent or not all(isinstance(r, list) for r in ent):
            raise SchemaError("/entries", "entries are arrays of rows")
        for i, r in enumerate(ent):
            if len(r) != len(ent[0]):
                raise SchemaError(f"/entries/{i}", "ragged matrix row")
        return cls([[ExactPolynomial.from_json(e, f"/entries/{i}/{j}") for j, e in enumerate(r)]
                    for i, r in enumerate(ent)])


def _det(rows: Sequence[Sequence[ExactPolynomial]]) -> ExactPolynomial:
    """Laplace expansion along the first row (fine for n <= 6)."""
    n = len(rows)
    if n == 0:
        return ExactPolynomial([1])
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    acc = ExactPolynomial()
    for j in range(n):
        a = rows[0][j]
        if a.is_zero():
            continue
        sub = [[r[k] for k in range(n) if k != j] for r in rows[1:]]
        term = a * _det(sub)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


# ---------------------------------------------------------------------------
# Smith form


@dataclass(frozen=True)
class SmithResult:
    U: ExactPolyMatrix
    V: ExactPolyMatrix
    S: ExactPolyMatrix
    invariant_factors: tuple[ExactPolynomial, ...]
    rank: int

    def to_json(self) -> dict[str, Any]:
        return {"rank": self.rank, "invariant_factors": [s.to_json() for s in self.invariant_factors],
                "S": self.S.to_json(), "U": self.U.to_json(), "V": self.V.to_json()}


def _swap_rows(A: list, i: int, j: int) -> None:
    A[i], A[j] = A[j], A[i]


def _swap_cols(A: list, i: int, j: int) -> None:
    for r in A:
        r[i], r[j] = r[j], r[i]


def smith_form(P: ExactPolyMatrix) -> SmithResult:
    """``U P V = S`` with U, V unimodular and S quasi-diagonal.

    Pivots are minimal by (degree, coefficient height); rows and columns
    are reduced by exact division, and a row addition restores divisibility
    of the trailing block whenever it fails.
    """
    m, n = P.shape
    if max(m, n) > MAX_SIZE:
        raise SizeCapExceeded(f"size {m}x{n} exceeds {MAX_SIZE}")
    if P.degree > MAX_DEGREE:
        raise SizeCapExceeded(f"degree {P.degree} exceeds {MAX_DEGREE}")
    A = [list(r) for r in P.rows]
    U = [list(r) for r in ExactPolyMatrix.identity(m).rows]
    V = [list(r) for r in ExactPolyMatrix.identity(n).rows]
    rank = 0
    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    e = A[i][j]
                    if not e.is_zero():
                        key = (e.degree, e.height(), i, j)
                        if best is None or key < best:
                            best = key
            if best is None:
                break
            _, _, pi, pj = best
            _swap_rows(A, t, pi)
            _swap_rows(U, t, pi)
            _swap_cols(A, t, pj)
            _swap_cols(V, t, pj)
            piv = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t].is_zero():
                    continue
                q, r = divmod(A[i][t], piv)
                A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                U[i] = [a - q * b for a, b in zip(U[i], U[t])]
                dirty |= not r.is_zero()
            if dirty:
                continue
            for j in range(t + 1, n):
                if A[t][j].is_zero():
                    continue
                q, r = divmod(A[t][j], piv)
                for row in A:
                    row[j] = row[j] - q * row[t]
                for row in V:
                    row[j] = row[j] - q * row[t]
                dirty |= not r.is_zero()
            if dirty:
                continue
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if not piv.divides(A[i][j])), None)
            if bad is not None:
                A[t] = [a + b for a, b in zip(A[t], A[bad])]
                U[t] = [a + b for a, b in zip(U[t], U[bad])]
                continue
            inv = piv.lc().inverse()
            A[t] = [a * inv for a in A[t]]
            U[t] = [a * inv for a in U[t]]
            rank = t + 1
            break
        if rank <= t:
            break
    # decreasing divisibility: reverse the leading r x r diagonal
    perm_r = list(range(rank - 1, -1, -1)) + list(range(rank, m))
    perm_c = list(range(rank - 1, -1, -1)) + list(range(rank, n))
    A = [[A[i][j] for j in perm_c] for i in perm_r]
    U = [U[i] for i in perm_r]
    V = [[row[j] for j in perm_c] for row in V]
    factors = tuple(A[j][j] for j in range(rank))
    return SmithResult(ExactPolyMatrix(U), ExactPolyMatrix(V), ExactPolyMatrix(A), factors, rank)


def invariant_factors_via_minors(P: ExactPolyMatrix) -> list[ExactPolynomial]:
    """``s_j = p_{r-j+1} / p_{r-j}`` with p_k the monic gcd of all k x k minors."""
    m, n = P.shape
    if max(m, n) > MINOR_MAX_SIZE:
        raise SizeCapExceeded(f"minor oracle is capped at {MINOR_MAX_SIZE}x{MINOR_MAX_SIZE}")
    if P.degree > MINOR_MAX_DEGREE:
        raise SizeCapExceeded(f"minor oracle is capped at degree {MINOR_MAX_DEGREE}")
    p = [ExactPolynomial([1])]
    for k in range(1, min(m, n) + 1):
        g = ExactPolynomial()
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                g = poly_gcd(g, P.minor(rows, cols))
        if g.is_zero():
            break
        p.append(g)
    r = len(p) - 1
    return [p[r - j + 1] // p[r - j] for j in range(1, r + 1)]


def is_unimodular(P: ExactPolyMatrix) -> bool:
    m, n = P.shape
    if m != n:
        raise NotSquare(f"unimodularity of a {m}x{n} matrix")
    d = P.det()
    return d.degree == 0


def increasing_order(factors: Sequence[ExactPolynomial]) -> list[ExactPolynomial]:
    """Convert to the s_j | s_{j+1} convention used by most references."""
    return list(reversed(factors))


# ---------------------------------------------------------------------------
# orbit witness


@dataclass(frozen=True)
class OrbitWitness:
    E: ExactPolyMatrix
    F: ExactPolyMatrix
    Q: ExactPolyMatrix
    x: tuple[int, ...]
    d: int

    def to_json(self) -> dict[str, Any]:
        return {"d": self.d, "x": list(self.x), "E": self.E.to_json(), "F": self.F.to_json(),
                "Q": self.Q.to_json(), "det_F": self.F.det().to_json()}


def orbit_witness(S: SmithResult | ExactPolyMatrix, d: int | None = None) -> OrbitWitness:
    """A member ``Q = E S F`` of the equivalence orbit that is not hyperstable on the closed unit disc.

    ``F`` is the identity except for the leading block
    ``[[1, t], [t^(d-1), t^d + 1]]`` which has determinant 1.  For the
    direction e_2 every achievable polynomial has root product of modulus 1.
    """
    Sm = S.S if isinstance(S, SmithResult) else S
    m, n = Sm.shape
    if m != n or n < 2:
        raise PreconditionViolated("a square Smith form of size at least 2 is required")
    diag = [Sm[i, i] for i in range(n)]
    if any(Sm[i, j] != ExactPolynomial() for i in range(n) for j in range(n) if i != j):
        raise PreconditionViolated("S must be diagonal")
    if any(s.is_zero() for s in diag):
        raise PreconditionViolated("S must be regular")
    for s in diag:
        if s.degree >= 1:
            rs = np.roots(s.to_complex()[::-1])
            if np.any(np.abs(rs) <= 1.0 + 1e-12):
                raise PreconditionViolated("invariant factors must be stable on the closed unit disc")
    q, r = divmod(diag[0], diag[1])
    if not r.is_zero():
        raise PreconditionViolated("s_2 must divide s_1")
    if d is None:
        d = q.degree + 2
    if d < 1:
        raise PreconditionViolated("d must be positive")
    F = ExactPolyMatrix.identity(n).rows
    F[0][0], F[0][1] = ExactPolynomial([1]), LAMBDA
    F[1][0], F[1][1] = LAMBDA ** (d - 1), LAMBDA ** d + 1
    Fm = ExactPolyMatrix(F)
    E = ExactPolyMatrix.identity(n)
    Q = E @ Sm @ Fm
    x = tuple(1 if i == 1 else 0 for i in range(n))
    return OrbitWitness(E, Fm, Q, x, d)
