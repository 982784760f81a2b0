"""Stability regions in the complex plane.

Four kinds are supported: discs, disc exteriors, half-planes
``{im(z e^{i phi}) > offset}`` and sectors ``{lo < Arg z < hi}``.  Every
region carries an open/closed flag; membership of 0 in a sector is an explicit
flag.  ``margin`` is a signed continuous surrogate for membership used by the
optimizers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import SchemaError, Unrepresentable

DISC = "disc"
DISC_EXTERIOR = "disc_exterior"
HALF_PLANE = "half_plane"
SECTOR = "sector"
KINDS = (DISC, DISC_EXTERIOR, HALF_PLANE, SECTOR)

TWO_PI = 2.0 * math.pi


def _wrap(theta):
    """Wrap angles into (-pi, pi]."""
    w = np.mod(np.asarray(theta, dtype=float) + math.pi, TWO_PI) - math.pi
    return np.where(w == -math.pi, math.pi, w)


@dataclass(frozen=True)
class RegionMargin:
    value: float
    degenerate: bool = False


@dataclass(frozen=True)
class Region:
    kind: str
    closed: bool = False
    center: complex = 0j
    radius: float = 1.0
    phi: float = 0.0
    offset: float = 0.0
    arg_lo: float = 0.0
    arg_hi: float = 0.0
    contains_zero: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        object.__setattr__(self, "center", complex(self.center))
        if self.kind in (DISC, DISC_EXTERIOR):
            if not self.radius > 0:
                raise ValueError("radius must be positive")
        elif self.kind == HALF_PLANE:
            object.__setattr__(self, "phi", float(self.phi) % TWO_PI)
        else:
            lo, hi = float(self.arg_lo), float(self.arg_hi)
            if not (-math.pi <= lo < math.pi and lo < hi <= lo + TWO_PI):
                raise ValueError("sector needs -pi <= arg_lo < pi and arg_lo < arg_hi <= arg_lo + 2 pi")

    # constructors -------------------------------------------------------

    @classmethod
    def disc(cls, center: complex = 0j, radius: float = 1.0, closed: bool = False) -> "Region":
        return cls(DISC, closed=closed, center=center, radius=float(radius))

    @classmethod
    def disc_exterior(cls, center: complex = 0j, radius: float = 1.0, closed: bool = False) -> "Region":
        return cls(DISC_EXTERIOR, closed=closed, center=center, radius=float(radius))

    @classmethod
    def half_plane(cls, phi: float = 0.0, offset: float = 0.0, closed: bool = False) -> "Region":
        return cls(HALF_PLANE, closed=closed, phi=float(phi), offset=float(offset))

    @classmethod
    def sector(cls, arg_lo: float, arg_hi: float, closed: bool = False,
               contains_zero: bool = False) -> "Region":
        return cls(SECTOR, closed=closed, arg_lo=float(arg_lo), arg_hi=float(arg_hi),
                   contains_zero=contains_zero)

    # membership ---------------------------------------------------------

    def margins(self, z) -> np.ndarray:
        """Vectorized margin values (sector margin at 0 is 0)."""
        z = np.asarray(z, dtype=complex)
        if self.kind == DISC:
            return self.radius - np.abs(z - self.center)
        if self.kind == DISC_EXTERIOR:
            return np.abs(z - self.center) - self.radius
        if self.kind == HALF_PLANE:
            return (z * np.exp(1j * self.phi)).imag - self.offset
        mid = 0.5 * (self.arg_lo + self.arg_hi)
        half = 0.5 * (self.arg_hi - self.arg_lo)
        delta = _wrap(np.angle(z) - mid)
        return np.where(z == 0, 0.0, half - np.abs(delta))

    def margin(self, z: complex) -> RegionMargin:
        degenerate = self.kind == SECTOR and z == 0
        return RegionMargin(float(self.margins(z)), degenerate)

    def contains_array(self, z, tol: float = 0.0) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        m = self.margins(z)
        inside = np.where(m > tol, True, np.where(m < -tol, False, self.closed))
        if self.kind == SECTOR:
            inside = np.where(z == 0, self.contains_zero, inside)
        return inside.astype(bool)

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        return bool(self.contains_array(complex(z), tol))

    def boundary_sensitive(self, z: complex, tol: float) -> bool:
        return abs(float(self.margins(z))) <= tol

    def complement_is_convex(self) -> bool:
        if self.kind in (HALF_PLANE, DISC_EXTERIOR):
            return True
        if self.kind == SECTOR:
            # the complement of a cone of opening >= pi is a cone of opening <= pi
            return self.arg_hi - self.arg_lo >= math.pi
        return False

    def is_convex(self) -> bool:
        if self.kind in (HALF_PLANE, DISC):
            return True
        if self.kind == SECTOR:
            return self.arg_hi - self.arg_lo <= math.pi
        return False

    # transformations ----------------------------------------------------

    def affine_pullback(self, alpha: complex, beta: complex = 0j) -> "Region":
        """Region R' with ``z in R'`` iff ``alpha*z + beta in self``."""
        alpha, beta = complex(alpha), complex(beta)
        if alpha == 0:
            raise ValueError("alpha must be nonzero")
        if self.kind in (DISC, DISC_EXTERIOR):
            return Region(self.kind, closed=self.closed, center=(self.center - beta) / alpha,
                          radius=self.radius / abs(alpha))
        psi = math.atan2(alpha.imag, alpha.real)
        if self.kind == HALF_PLANE:
            rot = complex(math.cos(self.phi), math.sin(self.phi))
            off = (self.offset - (beta * rot).imag) / abs(alpha)
            return Region.half_plane(self.phi + psi, off, self.closed)
        if beta != 0:
            raise Unrepresentable("a translated sector is not a sector")
        lo = self.arg_lo - psi
        hi = self.arg_hi - psi
        shift = TWO_PI * math.floor((lo + math.pi) / TWO_PI)
        lo, hi = lo - shift, hi - shift
        if lo >= math.pi:
            lo, hi = lo - TWO_PI, hi - TWO_PI
        return Region.sector(lo, hi, self.closed, self.contains_zero)

    def interior_point(self) -> complex:
        if self.kind == DISC:
            return self.center
        if self.kind == DISC_EXTERIOR:
            return self.center + 2.0 * self.radius
        if self.kind == HALF_PLANE:
            return complex(0.0, self.offset + 1.0) * np.exp(-1j * self.phi)
        return complex(np.exp(0.5j * (self.arg_lo + self.arg_hi)))

    def from_plane(self, u) -> np.ndarray:
        """Map arbitrary complex parameters onto points of the region.

        The map is continuous and its image is dense in the region, which
        lets unconstrained optimizers search inside ``self``.
        """
        u = np.asarray(u, dtype=complex)
        if self.kind == DISC:
            return self.center + self.radius * u / np.sqrt(1.0 + np.abs(u) ** 2)
        if self.kind == DISC_EXTERIOR:
            r = np.abs(u)
            direction = np.where(r > 0, u / np.where(r > 0, r, 1.0), 1.0)
            return self.center + direction * (self.radius + r)
        if self.kind == HALF_PLANE:
            w = u.real + 1j * (self.offset + u.imag ** 2)
            return w * np.exp(-1j * self.phi)
        t = 1.0 / (1.0 + np.exp(-u.imag))
        ang = self.arg_lo + (self.arg_hi - self.arg_lo) * t
        return np.exp(u.real) * np.exp(1j * ang)

    def from_plane_bounded(self, u, R: float) -> np.ndarray:
        """Like :meth:`from_plane` but onto the part of the region within about R of its anchor."""
        u = np.asarray(u, dtype=complex)
        sig = lambda t: 0.5 * (1.0 + np.tanh(0.5 * t))
        if self.kind == DISC:
            return self.from_plane(u)
        if self.kind == DISC_EXTERIOR:
            ang = np.angle(u)
            return self.center + np.exp(1j * ang) * (self.radius + R * sig(np.abs(u) - 1.0))
        if self.kind == HALF_PLANE:
            w = R * np.tanh(u.real) + 1j * (self.offset + R * sig(u.imag))
            return w * np.exp(-1j * self.phi)
        ang = self.arg_lo + (self.arg_hi - self.arg_lo) * sig(u.imag)
        return R * sig(u.real) * np.exp(1j * ang)

    def subset_of(self, other: "Region") -> bool:
        """Conservative containment test; False means "not established"."""
        if self == other:
            return True
        strict = self.closed and not other.closed
        if other.kind == HALF_PLANE:
            if self.kind == HALF_PLANE:
                if abs(_wrap(self.phi - other.phi)) > 1e-15:
                    return False
                return self.offset > other.offset or (self.offset == other.offset and not strict)
            if self.kind == DISC:
                m = float(other.margins(self.center)) - self.radius
                return m > 0 or (m == 0 and not strict)
            if self.kind == SECTOR:
                if other.offset > 0 or (self.contains_zero and not (other.offset < 0 or other.closed)):
                    return False
                lo = self.arg_lo + other.phi
                hi = self.arg_hi + other.phi
                shift = TWO_PI * math.floor(lo / TWO_PI)
                lo, hi = lo - shift, hi - shift
                if strict:
                    return 0 < lo and hi < math.pi
                return 0 <= lo and hi <= math.pi
            return False
        if other.kind == SECTOR:
            if self.kind != SECTOR:
                return False
            if self.contains_zero and not other.contains_zero:
                return False
            lo = self.arg_lo - other.arg_lo
            shift = TWO_PI * math.floor(lo / TWO_PI)
            lo -= shift
            hi = self.arg_hi - other.arg_lo - shift
            width = other.arg_hi - other.arg_lo
            if strict:
                return 0 < lo and hi < width
            return 0 <= lo and hi <= width
        if other.kind == DISC:
            if self.kind != DISC:
                return False
            m = other.radius - abs(self.center - other.center) - self.radius
            return m > 0 or (m == 0 and not strict)
        if other.kind == DISC_EXTERIOR:
            if self.kind == DISC_EXTERIOR:
                m = self.radius - abs(self.center - other.center) - other.radius
                return m > 0 or (m == 0 and not strict)
            if self.kind == DISC:
                m = abs(self.center - other.center) - self.radius - other.radius
                return m > 0 or (m == 0 and not strict)
        return False

    # serialization ------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        if self.kind in (DISC, DISC_EXTERIOR):
            return {"kind": self.kind, "center": [self.center.real, self.center.imag],
                    "radius": self.radius, "closed": self.closed}
        if self.kind == HALF_PLANE:
            return {"kind": self.kind, "phi": self.phi, "offset": self.offset, "closed": self.closed}
        return {"kind": self.kind, "arg_lo": self.arg_lo, "arg_hi": self.arg_hi,
                "closed": self.closed, "contains_zero": self.contains_zero}

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "Region":
        if not isinstance(doc, dict):
            raise SchemaError("", "region must be an object")
        kind = doc.get("kind")
        if kind not in KINDS:
            raise SchemaError("/kind", f"expected one of {list(KINDS)}")
        closed = bool(doc.get("closed", False))
        try:
            if kind in (DISC, DISC_EXTERIOR):
                c = doc.get("center", [0.0, 0.0])
                return cls(kind, closed=closed, center=complex(c[0], c[1]),
                           radius=float(doc.get("radius", 1.0)))
            if kind == HALF_PLANE:
                return cls.half_plane(float(doc.get("phi", 0.0)), float(doc.get("offset", 0.0)), closed)
            return cls.sector(float(doc["arg_lo"]), float(doc["arg_hi"]), closed,
                              bool(doc.get("contains_zero", False)))
        except (KeyError, TypeError, IndexError) as exc:
            raise SchemaError("", f"malformed {kind} region: {exc}") from exc
        except ValueError as exc:
            raise SchemaError("", str(exc)) from exc

    def describe(self) -> str:
        c = "closed" if self.closed else "open"
        if self.kind == DISC:
            return f"{c} disc |z-({self.center})| radius {self.radius}"
        if self.kind == DISC_EXTERIOR:
            return f"{c} exterior of disc |z-({self.center})| radius {self.radius}"
        if self.kind == HALF_PLANE:
            return f"{c} half-plane im(z e^(i {self.phi:.6g})) > {self.offset:.6g}"
        return f"{c} sector {self.arg_lo:.6g} < Arg z < {self.arg_hi:.6g}"


def H(phi: float = 0.0, closed: bool = False) -> Region:
    """The half-plane ``{im(z e^{i phi}) > 0}``."""
    return Region.half_plane(phi, 0.0, closed)


UNIT_DISC = Region.disc(0j, 1.0, closed=False)
CLOSED_UNIT_DISC = Region.disc(0j, 1.0, closed=True)


def whole_plane() -> Region:
    """The complex plane, as the closed full-turn sector containing 0."""
    return Region.sector(-math.pi, math.pi, closed=True, contains_zero=True)


def punctured_plane() -> Region:
    """The complex plane without the origin."""
    return Region.sector(-math.pi, math.pi, closed=True, contains_zero=False)
