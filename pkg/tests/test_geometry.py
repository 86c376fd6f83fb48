import math

import numpy as np
import pytest
from shapely.geometry import Point as ShPoint
from shapely.geometry import Polygon as ShPolygon

from cenbm.errors import DegenerateInputError
from cenbm.geometry import (
    AffineMap,
    ConvexPolygon,
    apply,
    area,
    centroid,
    chord_at,
    compose,
    contains_point,
    contains_polygon,
    invert,
    radial_distance,
    random_convex_polygon,
    regular_polygon,
    rotation,
    scale_about,
    translation,
)
from cenbm.hexagon import AffineRegularHexagon, star_over

from conftest import SQRT3, random_affine, random_polygon


@pytest.mark.parametrize(
    "verts, expected",
    [
        ([(0, 0), (1, 0), (1, 1), (0, 1)], (0.5, 0.5)),
        ([(0, 0), (1, 0), (0, 1)], (1 / 3, 1 / 3)),
        ([(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)], (0.0, 0.0)),
    ],
)
def test_centroid_examples(verts, expected):
    assert np.allclose(centroid(ConvexPolygon(verts)), expected, atol=1e-15)


@pytest.mark.parametrize(
    "verts, expected",
    [
        ([(0, 0), (1, 0), (1, 1), (0, 1)], 1.0),
        ([(0, 0), (1, 0), (0, 1)], 0.5),
        ([(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)], 3 * SQRT3 / 2),
    ],
)
def test_area_examples(verts, expected):
    assert area(ConvexPolygon(verts)) == pytest.approx(expected, abs=1e-14)


def test_centroid_matches_shapely():
    for i in range(50):
        P = random_polygon(i)
        c = ShPolygon(P.vertices).centroid
        assert np.allclose(centroid(P), (c.x, c.y), atol=1e-12)


def test_constructor_cleans_ring():
    # clockwise with a repeated vertex and a collinear midpoint
    P = ConvexPolygon([(0, 1), (1, 1), (1, 0.5), (1, 0), (1, 0), (0, 0)])
    assert len(P) == 4
    assert area(P) == pytest.approx(1.0)
    v = P.vertices
    e = np.roll(v, -1, axis=0) - v
    assert np.all(e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0] > 0)


@pytest.mark.parametrize(
    "verts",
    [
        [(0, 0), (1, 0)],
        [(0, 0), (1, 0), (2, 0)],
        [(0, 0), (2, 0), (1, 0.2), (2, 2), (0, 2)],
        [(0, 0), (1, 0), (float("nan"), 1)],
    ],
)
def test_invalid_polygons_rejected(verts):
    with pytest.raises(DegenerateInputError):
        ConvexPolygon(verts)


def test_json_round_trip(square):
    P = random_convex_polygon(17, seed=4)
    assert ConvexPolygon.from_json(P.to_json()) == P
    m = AffineMap([[1.5, -0.25], [0.125, 2.0]], (0.1, -3.0))
    assert AffineMap.from_json(m.to_json()).to_list() == m.to_list()
    assert AffineMap.from_list(m.to_list()).to_list() == m.to_list()


@pytest.mark.parametrize(
    "pt, tol, expected",
    [((0.5, 0.5), 0.0, True), ((1.000001, 0.5), 1e-3, True), ((2, 2), 1e-9, False), ((1.0, 1.0), 0.0, True)],
)
def test_contains_point_examples(square, pt, tol, expected):
    assert contains_point(square, pt, tol) is expected


def test_contains_polygon_examples(square):
    big = apply(scale_about((0.5, 0.5), 2.0), square)
    assert contains_polygon(big, square)
    assert not contains_polygon(square, big)
    hx = AffineRegularHexagon.canonical()
    boundary = star_over(hx)
    assert all(boundary.contains_point(v) for v in hx.vertices)
    assert boundary.contains_polygon(hx.polygon())


def test_contains_polygon_matches_sampling_oracle():
    rng = np.random.default_rng(11)
    for i in range(200):
        outer = random_polygon(i, base=500)
        inner = apply(AffineMap(np.eye(2) * rng.uniform(0.2, 1.2), rng.normal(scale=0.3, size=2)),
                      random_polygon(i, base=900))
        # the oracle samples the inner polygon densely, vertices included
        w = rng.dirichlet(np.ones(len(inner)), size=1000)
        pts = np.vstack([w @ inner.vertices, inner.vertices])
        shp = ShPolygon(outer.vertices).buffer(1e-12)
        oracle = all(shp.covers(ShPoint(p)) for p in pts)
        assert contains_polygon(outer, inner, 1e-12) == oracle


@pytest.mark.parametrize(
    "verts, theta, t, expected",
    [
        ([(0, 0), (1, 0), (1, 1), (0, 1)], 0.0, 0.5, ((0, 0.5), (1, 0.5))),
        ([(0, 0), (1, 0), (1, 1), (0, 1)], 0.0, 2.0, None),
        ([(0, 0), (1, 0), (0, 1)], 0.0, 0.5, ((0, 0.5), (0.5, 0.5))),
    ],
)
def test_chord_examples(verts, theta, t, expected):
    seg = chord_at(ConvexPolygon(verts), theta, t)
    if expected is None:
        assert seg is None
    else:
        assert np.allclose([seg.a, seg.b], expected, atol=1e-15)
        assert seg.length == pytest.approx(np.hypot(*np.subtract(*expected)))


def test_chord_length_is_concave():
    rng = np.random.default_rng(2)
    for i in range(40):
        P = random_polygon(i, base=40)
        theta = rng.uniform(0, math.pi)
        n = np.array([-math.sin(theta), math.cos(theta)])
        tv = P.vertices @ n
        ts = np.linspace(tv.min(), tv.max(), 100)
        w = np.array([chord_at(P, theta, t).length for t in ts])
        # midpoint test on consecutive triples
        assert np.all(w[1:-1] - 0.5 * (w[:-2] + w[2:]) >= -1e-9 * P.diameter)


@pytest.mark.parametrize(
    "poly, origin, angle, expected",
    [
        (regular_polygon(6), (0, 0), 0.0, 1.0),
        (regular_polygon(6), (0, 0), math.pi / 6, SQRT3 / 2),
        (ConvexPolygon([(0, 0), (1, 0), (1, 1), (0, 1)]), (0.5, 0.5), 0.0, 0.5),
    ],
)
def test_radial_distance_examples(poly, origin, angle, expected):
    assert radial_distance(poly, origin, angle) == pytest.approx(expected, abs=1e-14)


def test_radial_distance_needs_interior_origin(square):
    with pytest.raises(DegenerateInputError):
        radial_distance(square, (0.0, 0.5), 0.3)


def test_map_examples(square):
    big = apply(scale_about((0, 0), 2.0), square)
    assert np.allclose(big.vertices.max(axis=0), (2, 2))
    inv = invert(translation((1, 1)))
    assert np.allclose(inv.matrix, np.eye(2)) and np.allclose(inv.offset, (-1, -1))
    ident = compose(rotation(math.pi / 6), rotation(-math.pi / 6))
    assert np.allclose(ident.matrix, np.eye(2), atol=1e-15) and np.allclose(ident.offset, 0)


def test_compose_order():
    a, b = translation((1, 0)), scale_about((0, 0), 3.0)
    x = np.array([1.0, 2.0])
    assert np.allclose(compose(a, b)(x), a(b(x)))


def test_singular_map_rejected():
    with pytest.raises(DegenerateInputError):
        AffineMap([[1, 2], [2, 4]])


def test_reflection_keeps_counterclockwise(triangle):
    img = apply(AffineMap([[-1, 0], [0, 1]]), triangle)
    assert area(img) == pytest.approx(0.5)
    assert np.allclose(centroid(img), (-1 / 3, 1 / 3))


def test_centroid_affine_equivariance():
    rng = np.random.default_rng(3)
    for i in range(1000):
        P = random_polygon(i, base=3000)
        A = random_affine(rng)
        img = apply(A, P)
        assert np.abs(centroid(img) - A(centroid(P))).max() <= 1e-9 * img.diameter


def test_invert_compose_round_trip():
    rng = np.random.default_rng(4)
    for i in range(200):
        P = random_polygon(i, base=4000)
        A, B = random_affine(rng), random_affine(rng)
        back = apply(compose(invert(B), invert(A)), apply(compose(A, B), P))
        disp = np.abs(np.sort(back.vertices, axis=0) - np.sort(P.vertices, axis=0)).max()
        assert disp <= 1e-10 * P.diameter


@pytest.mark.parametrize("n, seed", [(3, 1), (50, 7), (12, 0)])
def test_random_polygon_contract(n, seed):
    P = random_convex_polygon(n, seed)
    assert 3 <= len(P) <= n
    assert random_convex_polygon(n, seed) == P
    assert ConvexPolygon(P.vertices) == P


def test_random_polygon_needs_three():
    with pytest.raises(DegenerateInputError):
        random_convex_polygon(2, 0)
