"""Strip lifts, the comparison loop, certified indices, Nielsen separation."""

import numpy as np
import pytest

from sphere_census import annuli, census, strip_lift
from sphere_census.charts import (
    AffineProfile,
    Power,
    ProductMap,
    RationalPair,
    chordal,
    evaluate,
)
from sphere_census.strip_lift import (
    MNotFound,
    StripMap,
    build_beta,
    lift,
    lift_fixed_point,
    nielsen_fixed_points,
    verify_index,
)


def repel(d: int) -> ProductMap:
    return ProductMap(AffineProfile(2.0, 0.0), d)


def component(spec):
    return annuli.decompose(spec)[0]


def test_lift_closed_form_product():
    spec = repel(2)
    F = lift(spec, component(spec), k=0)
    # s window [-1, 1] maps to y in [0.25, 0.75]; s = 0 sits at y = 0.5
    x, y = F(0.3, 0.5)
    assert x == pytest.approx(0.6)
    assert y == pytest.approx(0.5)  # q(0) = 0 stays at mid-latitude
    # one window down: s = -1 maps to q = -2, one window below the bottom
    assert F(0.0, 0.25)[1] == pytest.approx(0.0)


def test_lift_offset_is_deck_translation():
    spec = repel(2)
    F0 = lift(spec, component(spec), k=0)
    F1 = lift(spec, component(spec), k=1)
    a = F0(0.2, 0.6)
    b = F1(0.2, 0.6)
    assert b[0] - a[0] == pytest.approx(1.0)
    assert b[1] == pytest.approx(a[1])


def test_lift_of_power_doubles_x():
    spec = Power(2)
    F = lift(spec, component(spec), k=0)
    assert F(0.37, 0.5)[0] == pytest.approx(0.74)


def test_equivariance_on_random_points():
    spec = repel(3)
    F = lift(spec, component(spec), k=0)
    rng = np.random.default_rng(9)
    for _ in range(1000):
        x = rng.uniform(-3, 3)
        y = rng.uniform(0.25, 0.75)
        a = F(x + 1.0, y)
        b = F(x, y)
        assert abs(a[0] - b[0] - 3) <= 1e-9
        assert abs(a[1] - b[1]) <= 1e-9


def test_projection_commutes():
    spec = repel(-2)
    F = lift(spec, component(spec), k=0)
    rng = np.random.default_rng(4)
    for _ in range(100):
        x, y = rng.uniform(-1, 1), rng.uniform(0.3, 0.7)
        upstairs = F(x, y)
        down = evaluate(spec, F.project(x, y))
        assert chordal(F.project(*upstairs), down) <= 1e-9


def test_continuation_lift_of_reciprocal():
    # 1/z is not latitude-trivial in product form on the lift path, so this
    # exercises the angle-continuation branch: F(x, y) = (-x + k, 1 - y)
    spec = RationalPair((1,), (0, 1))
    comp = component(spec)
    F = lift(spec, comp, k=0)
    assert F.translation_degree == -1
    x, y = F(0.25, 0.6)
    assert x == pytest.approx(-0.25, abs=1e-9)
    # latitude flips: s -> -s, i.e. y -> 1 - y in the symmetric window
    assert y == pytest.approx(0.4, abs=1e-9)


def test_build_beta_spans():
    F = lift(repel(2), component(repel(2)), k=0)
    b1 = build_beta(F, 1)
    xs = [z.real for z in b1.points]
    assert min(xs) == -1.0 and max(xs) == 1.0
    b3 = build_beta(F, 3)
    xs = [z.real for z in b3.points]
    assert min(xs) == -3.0 and max(xs) == 3.0
    b0 = build_beta(F, 0)
    xs = [z.real for z in b0.points]
    assert min(xs) == 0.0 and max(xs) == 1.0
    ys = [z.imag for z in b0.points]
    assert min(ys) == 0.25 and max(ys) == 0.75


@pytest.mark.parametrize("d,want", [(2, 1), (-1, -1), (0, -1)])
def test_verify_index_certified_values(d, want):
    spec = repel(d)
    F = lift(spec, component(spec), k=0)
    result = verify_index(F)
    assert result.index == want
    assert 1 <= result.m_used <= 64


def test_verify_index_rejects_degree_one():
    spec = repel(1)
    F = lift(spec, component(spec), k=0)
    with pytest.raises(ValueError):
        verify_index(F)


def test_verify_index_needs_repelling_behavior():
    # contracting radial never satisfies the boundary displacement pattern
    spec = ProductMap(AffineProfile(0.5, 0.0), 2)
    comp = component(spec)
    F = StripMap(spec, comp, translation_degree=2, lift_offset=0)
    with pytest.raises(MNotFound):
        verify_index(F, m_cap=8)


def test_lift_fixed_point_projects_to_map_fixed_point():
    for d in (2, -1, 0):
        spec = repel(d)
        F = lift(spec, component(spec), k=0)
        res = verify_index(F)
        z = lift_fixed_point(F, res.m_used)
        downstairs = F.project(z.real, z.imag)
        assert chordal(evaluate(spec, downstairs), downstairs) < 1e-10


@pytest.mark.parametrize("d", [2, 3, -1, -2])
def test_nielsen_lifts_give_distinct_fixed_points(d):
    spec = repel(d)
    comp = component(spec)
    fps = nielsen_fixed_points(spec, comp)
    assert len(fps) == abs(d - 1)
    for fp in fps:
        assert fp.residual < 1e-10
    for i, a in enumerate(fps):
        for b in fps[i + 1:]:
            assert chordal(a.sphere_point, b.sphere_point) > 1e-3
    # the projections are exactly the interior fixed points of the map
    interior = [p for p in census.fixed_points(spec, 1).points
                if -1 < p.latitude() < 1]
    assert len(interior) == len(fps)
    for fp in fps:
        assert min(chordal(fp.sphere_point, q) for q in interior) < 1e-9
