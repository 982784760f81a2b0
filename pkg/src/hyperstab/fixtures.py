"""Deterministic constructors for the worked examples and seeded families."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .matpoly import MatrixPolynomial
from .regions import Region
from .scalarpoly import ComplexPolynomial

I2 = np.eye(2)
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def exa() -> MatrixPolynomial:
    """``[[1, t], [t, t^2 + 1]]``: stable on the closed unit disc, not hyperstable."""
    return MatrixPolynomial([I2, SWAP, np.diag([0.0, 1.0])])


def sing(which: str = "singular") -> MatrixPolynomial:
    """``singular``: ``[[t^2, t], [t, 1]]``; ``regular``: pencil with det ``(t - 1)^2``."""
    if which == "singular":
        return MatrixPolynomial([np.diag([0.0, 1.0]), SWAP, np.diag([1.0, 0.0])])
    if which == "regular":
        J = np.array([[0.0, 1.0], [-1.0, 0.0]])
        return MatrixPolynomial([-J, J])
    raise ValueError("which must be 'singular' or 'regular'")


def _nongl_entries(p: ComplexPolynomial, q: ComplexPolynomial, extra: ComplexPolynomial) -> MatrixPolynomial:
    t = ComplexPolynomial([0, 1])
    return MatrixPolynomial.from_entries([[t * p + q, p], [t, ComplexPolynomial([1]) + extra]])


def nonGL(p: ComplexPolynomial | None = None, q: ComplexPolynomial | None = None) -> MatrixPolynomial:
    """``[[t p + q, p], [t, 1]]`` with det q and det of the derivative ``-p'``."""
    p = ComplexPolynomial([0, -4, 0, 1]) if p is None else p
    q = ComplexPolynomial([0, 0, 1]) if q is None else q
    return _nongl_entries(p, q, ComplexPolynomial())


def hyper_nsinf(eps: float = 0.01) -> MatrixPolynomial:
    """``[[t^4 - 3t^2, t^3 - 4t], [t, 1 + eps t^4]]``."""
    p = ComplexPolynomial([0, -4, 0, 1])
    q = ComplexPolynomial([0, 0, 1])
    return _nongl_entries(p, q, ComplexPolynomial([0, 0, 0, 0, eps]))


def nonstab():
    """T_2 of the exa polynomial."""
    from .multipoly import polarize
    return polarize(exa(), 2)


def orbits(d: int = 2, S=None):
    """Orbit witness built from S (identity by default)."""
    from .smith import ExactPolyMatrix, orbit_witness
    S = ExactPolyMatrix.identity(2) if S is None else S
    return orbit_witness(S, d)


@dataclass(frozen=True)
class HalfPlaneData:
    R0: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    J: np.ndarray

    @property
    def P(self) -> MatrixPolynomial:
        return MatrixPolynomial([self.R0, self.J + self.R1, self.R2])


def halfplane3x3() -> HalfPlaneData:
    R0 = np.array([[1.0, 1, 0], [1, 2, 1], [0, 1, 1]])
    R1 = np.ones((3, 3))
    R2 = np.array([[2.0, -1, 0], [-1, 2, -1], [0, -1, 2]])
    J = np.array([[0.0, 1, 2], [-1, 0, 1], [-2, -1, 0]])
    return HalfPlaneData(R0, R1, R2, J)


def block4x4() -> MatrixPolynomial:
    """Block upper-triangular example with pencil diagonal blocks."""
    c = lambda *a: ComplexPolynomial(list(a))
    return MatrixPolynomial.from_entries([
        [c(0, 1), c(1), c(-1, 0, 0, 0, 1), c(-1, 0, 1)],
        [c(1), c(0, 1), c(1, 0, 1), c(1)],
        [c(0), c(0), c(-1, 1), c(0)],
        [c(0), c(0), c(0), c(1, 1)],
    ])


def mgt(a: float = 2.0, b: float = 3.0, c: float = 1.0, R: np.ndarray | None = None) -> MatrixPolynomial:
    """``t^3 I + a t^2 I + t b R + c R``."""
    R = np.diag([1.0, 2.0]) if R is None else np.asarray(R, dtype=complex)
    n = R.shape[0]
    return MatrixPolynomial([c * R, b * R, a * np.eye(n), np.eye(n)])


# ---------------------------------------------------------------------------
# seeded families


def random_psd(rng: np.random.Generator, n: int, rank: int | None = None, complex_: bool = True) -> np.ndarray:
    rank = n if rank is None else rank
    G = rng.standard_normal((n, rank))
    if complex_:
        G = G + 1j * rng.standard_normal((n, rank))
    return G @ G.conj().T


def random_skew(rng: np.random.Generator, n: int) -> np.ndarray:
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (M - M.conj().T)


def cube(seed: int) -> list[np.ndarray]:
    """PSD coefficients A_0..A_d with d <= 4, n <= 3 (regular by construction)."""
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 5))
    n = int(rng.integers(1, 4))
    As = [random_psd(rng, n, int(rng.integers(1, n + 1))) for _ in range(d + 1)]
    As[d] = random_psd(rng, n)
    return As


def quad(seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """A0, A2 PSD and A1 with PSD Hermitian part."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    A2 = random_psd(rng, n)
    A0 = random_psd(rng, n, int(rng.integers(1, n + 1)))
    A1 = random_psd(rng, n, int(rng.integers(0, n + 1))) + random_skew(rng, n)
    return A0, A1, A2


def halfplane_random(seed: int) -> HalfPlaneData:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    R2 = random_psd(rng, n)
    R1 = random_psd(rng, n, int(rng.integers(0, n + 1)))
    R0 = random_psd(rng, n, int(rng.integers(0, n + 1)))
    return HalfPlaneData(R0, R1, R2, random_skew(rng, n))


def mgt_random(seed: int) -> dict[str, Any]:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    c = float(rng.uniform(0.0, 2.0))
    R = random_psd(rng, n) + 0.1 * np.eye(n)
    return {"a": float(rng.uniform(1.05, 4.0)), "b": c + float(rng.uniform(0.05, 3.0)), "c": c, "R": R}


@dataclass(frozen=True)
class SubaddInstance:
    P: MatrixPolynomial
    D: Region


def subadd(seed: int) -> SubaddInstance:
    """Quadratic with ``r ||B1|| + r^2 ||B2|| < sigma_min(B0)`` around a random centre."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    center = complex(rng.normal(), rng.normal())
    r = float(rng.uniform(0.2, 2.0))
    B0 = np.eye(n) + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / n
    B1 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    B2 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    smin = np.linalg.svd(B0, compute_uv=False)[-1]
    load = r * np.linalg.norm(B1, 2) + r * r * np.linalg.norm(B2, 2)
    s = float(rng.uniform(0.1, 0.95)) * smin / load
    Q = MatrixPolynomial([B0, s * B1, s * B2])
    P = Q.substitute_affine(1.0, -center)
    return SubaddInstance(P, Region.disc(center, r, closed=bool(rng.integers(0, 2))))


def subadd2(seed: int) -> SubaddInstance:
    """Quadratic with ``r ||B1|| + ||B0|| < r^2 sigma_min(B2)`` around a random centre."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    center = complex(rng.normal(), rng.normal())
    r = float(rng.uniform(0.5, 3.0))
    B2 = np.eye(n) + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / n
    B1 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    B0 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    smin = np.linalg.svd(B2, compute_uv=False)[-1]
    load = r * np.linalg.norm(B1, 2) + np.linalg.norm(B0, 2)
    s = float(rng.uniform(0.1, 0.95)) * r * r * smin / load
    Q = MatrixPolynomial([s * B0, s * B1, B2])
    P = Q.substitute_affine(1.0, -center)
    return SubaddInstance(P, Region.disc_exterior(center, r, closed=bool(rng.integers(0, 2))))


# ---------------------------------------------------------------------------
# registry


def _ones(n: int = 2, d: int = 2):
    from .szasz import ones_factored
    return ones_factored(n, d)


def _cmv(n: int = 2, k: int = 1024):
    from .szasz import CmvFixture
    return CmvFixture(n, k)


def _comp(case: int = 1):
    from .szasz import comp_case
    return comp_case(case)


FIXTURES: dict[str, Callable[..., Any]] = {
    "exa": exa,
    "sing": sing,
    "ones": _ones,
    "cmv": _cmv,
    "comp": _comp,
    "nonGL": nonGL,
    "hyper_nsinf": hyper_nsinf,
    "orbits": orbits,
    "nonstab": nonstab,
    "halfplane3x3": halfplane3x3,
    "block4x4": block4x4,
    "cube": cube,
    "quad": quad,
    "mgt": mgt,
}


def matrix_fixture(name: str, **params) -> MatrixPolynomial:
    """Univariate matrix polynomial for a fixture id (used by the CLI)."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}")
    obj = FIXTURES[name](**params)
    if isinstance(obj, MatrixPolynomial):
        return obj
    if isinstance(obj, HalfPlaneData):
        return obj.P
    if name == "cube":
        return MatrixPolynomial(obj)
    if name == "quad":
        return MatrixPolynomial(list(obj))
    if name == "orbits":
        return obj.Q.to_matrix_polynomial()
    if hasattr(obj, "expanded"):
        return obj.expanded()
    if hasattr(obj, "as_matrix_polynomial"):
        return obj.as_matrix_polynomial()
    raise TypeError(f"fixture {name!r} is not a univariate matrix polynomial")


def corpus() -> list[tuple[str, MatrixPolynomial, Region]]:
    """Every univariate fixture paired with the region it is studied on."""
    from .regions import CLOSED_UNIT_DISC, H
    ext = Region.disc_exterior(0j, 1.0)
    out = [
        ("exa", exa(), CLOSED_UNIT_DISC),
        ("sing/singular", sing("singular"), H(0.0)),
        ("sing/regular", sing("regular"), H(0.0)),
        ("nonGL", nonGL(), ext),
        ("hyper_nsinf", hyper_nsinf(0.01), ext),
        ("halfplane3x3", halfplane3x3().P, H(math.pi / 2)),
        ("block4x4", block4x4(), H(0.0)),
        ("mgt", mgt(), H(math.pi / 2)),
        ("orbits/2", orbits(2).Q.to_matrix_polynomial(), CLOSED_UNIT_DISC),
    ]
    for s in range(4):
        out.append((f"cube/{s}", MatrixPolynomial(cube(s)), Region.sector(-math.pi / 4, math.pi / 4)))
        out.append((f"quad/{s}", MatrixPolynomial(list(quad(s))), H(math.pi / 2)))
        inst = subadd(s)
        out.append((f"subadd/{s}", inst.P, inst.D))
        inst = subadd2(s)
        out.append((f"subadd2/{s}", inst.P, inst.D))
    return out
