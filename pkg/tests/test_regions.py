from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperstab.errors import SchemaError, Unrepresentable
from hyperstab.regions import CLOSED_UNIT_DISC, UNIT_DISC, H, Region

finite = st.floats(min_value=-5, max_value=5, allow_nan=False)
cplx = st.builds(complex, finite, finite)

REGIONS = [
    H(0.0),
    H(0.0, closed=True),
    H(math.pi / 2),
    Region.half_plane(1.1, offset=0.4, closed=True),
    UNIT_DISC,
    CLOSED_UNIT_DISC,
    Region.disc(1 - 2j, 0.7),
    Region.disc_exterior(0j, 1.0),
    Region.disc_exterior(0.5j, 2.0, closed=True),
    Region.sector(0.0, math.pi / 6),
    Region.sector(-math.pi / 4, math.pi / 4, closed=True),
    Region.sector(-math.pi / 3, math.pi / 3, contains_zero=True),
]


def test_contains_examples():
    assert H(0.0).contains(1j)
    assert CLOSED_UNIT_DISC.contains(1.0)
    assert not UNIT_DISC.contains(1.0)
    assert Region.sector(0.0, math.pi / 6).contains(cmath.exp(1j * math.pi / 12))


def test_margin_examples():
    assert H(0.0).margin(2j).value == pytest.approx(2.0)
    assert UNIT_DISC.margin(0.5).value == pytest.approx(0.5)
    assert Region.disc_exterior(0j, 1.0).margin(3.0).value == pytest.approx(2.0)


def test_sector_margin_at_zero_is_degenerate():
    m = Region.sector(0.0, math.pi / 3).margin(0j)
    assert m.value == 0.0 and m.degenerate


def test_sector_zero_flag():
    assert not Region.sector(-1.0, 1.0).contains(0j)
    assert Region.sector(-1.0, 1.0, contains_zero=True).contains(0j)


def test_complement_convexity_flags():
    assert H(0.0).complement_is_convex()
    assert H(2.0, closed=True).complement_is_convex()
    assert not UNIT_DISC.complement_is_convex()
    assert Region.disc_exterior(0j, 1.0).complement_is_convex()
    assert not Region.sector(0.0, 1.0).complement_is_convex()


def test_affine_pullback_examples():
    R = H(0.0).affine_pullback(1.0, -1j)
    assert R.kind == "half_plane" and R.offset == pytest.approx(1.0)
    assert R.contains(1.5j) and not R.contains(0.5j)
    R = UNIT_DISC.affine_pullback(2.0, 0.0)
    assert R.radius == pytest.approx(0.5) and R.center == 0
    R = UNIT_DISC.affine_pullback(1.0, 1.0)
    assert R.center == pytest.approx(-1.0)


def test_sector_translation_unrepresentable():
    with pytest.raises(Unrepresentable):
        Region.sector(0.0, 1.0).affine_pullback(1.0, 1.0)


def test_invalid_regions_rejected():
    with pytest.raises(ValueError):
        Region.disc(0j, 0.0)
    with pytest.raises(ValueError):
        Region.sector(1.0, 0.5)


@pytest.mark.parametrize("R", REGIONS, ids=lambda r: r.describe())
def test_json_round_trip(R):
    assert Region.from_json(R.to_json()) == R


def test_from_json_rejects_bad_kind():
    with pytest.raises(SchemaError):
        Region.from_json({"kind": "triangle"})


@pytest.mark.parametrize("R", REGIONS, ids=lambda r: r.describe())
def test_margin_sign_agrees_with_membership(R):
    rng = np.random.default_rng(1)
    z = rng.uniform(-4, 4, 10_000) + 1j * rng.uniform(-4, 4, 10_000)
    m = R.margins(z)
    inside = R.contains_array(z)
    assert np.all(inside[m > 0])
    assert not np.any(inside[m < 0])
    edge = (m == 0) & (z != 0)
    assert np.all(inside[edge] == R.closed)


@pytest.mark.parametrize("R", [r for r in REGIONS if r.kind != "sector"], ids=lambda r: r.describe())
@given(alpha=cplx.filter(lambda a: abs(a) > 0.1), beta=cplx)
def test_pullback_round_trip(R, alpha, beta):
    back = R.affine_pullback(alpha, beta).affine_pullback(1 / alpha, -beta / alpha)
    rng = np.random.default_rng(2)
    z = rng.uniform(-4, 4, 1000) + 1j * rng.uniform(-4, 4, 1000)
    clear = np.abs(R.margins(z)) > 1e-9 * (1 + np.abs(z))
    assert np.array_equal(back.contains_array(z)[clear], R.contains_array(z)[clear])


@pytest.mark.parametrize("R", [r for r in REGIONS if r.kind != "sector"], ids=lambda r: r.describe())
@given(alpha=cplx.filter(lambda a: abs(a) > 0.1), beta=cplx, z=cplx)
def test_pullback_definition(R, alpha, beta, z):
    Q = R.affine_pullback(alpha, beta)
    w = alpha * z + beta
    if abs(R.margins(np.array([w]))[0]) > 1e-9 * (1 + abs(w)):
        assert Q.contains(z) == R.contains(w)


@given(theta=st.floats(min_value=-math.pi, max_value=math.pi), r=st.floats(min_value=0.1, max_value=3))
def test_sector_rotation_pullback(theta, r):
    S = Region.sector(-0.5, 0.7)
    Q = S.affine_pullback(r * cmath.exp(1j * theta), 0.0)
    z = cmath.exp(1j * 0.2)
    w = r * cmath.exp(1j * theta) * z
    if abs(S.margins(np.array([w]))[0]) > 1e-9:
        assert Q.contains(z) == S.contains(w)


@pytest.mark.parametrize("R", [r for r in REGIONS if r.complement_is_convex()], ids=lambda r: r.describe())
def test_convex_complement_property(R):
    rng = np.random.default_rng(3)
    z = rng.uniform(-6, 6, 20_000) + 1j * rng.uniform(-6, 6, 20_000)
    out = z[~R.contains_array(z)]
    k = len(out) // 2
    a, b = out[:k], out[k:2 * k]
    t = rng.uniform(0, 1, k)
    mid = t * a + (1 - t) * b
    assert not np.any(R.contains_array(mid, 1e-12) & (R.margins(mid) > 1e-12))
