"""Geometry layer: examples plus randomized invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tentstab import geom2d
from tentstab.errors import DegeneratePolygon, InvalidPolygon, SingularMatrix
from tentstab.geom2d import (
    EPS_AREA,
    AffineMap2,
    ConvexPolygon,
    HalfPlane,
    Matrix2,
    affine_image,
    area,
    clip,
    inradius,
    intersect,
    matrix_norms,
    min_interior_angle,
    monomial_integral,
    perimeter,
    snap_key,
)

from conftest import LEFT_HALF, RIGHT_HALF, TRIANGLE_T, convex_hull, random_convex_polygon

UNIT_SQUARE = geom2d.box(0.0, 0.0, 1.0, 1.0)


class TestArea:
    def test_triangle_T(self):
        assert area(TRIANGLE_T) == pytest.approx(1.0, abs=1e-15)

    def test_left_half(self):
        assert area(LEFT_HALF) == pytest.approx(0.5, abs=1e-15)

    def test_collinear_is_empty(self):
        p = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (2.0, 0.0)))
        assert p.is_empty
        assert area(p) == 0.0


class TestClip:
    def test_halves_left_triangle(self):
        h = HalfPlane.make(1.0, 0.0, 0.5)  # x <= 0.5
        out = clip(LEFT_HALF, h)
        assert area(out) == pytest.approx(0.125, abs=1e-12)
        keys = {snap_key(v) for v in out.vertices}
        assert keys == {snap_key(p) for p in ((0, 0), (0.5, 0), (0.5, 0.5))}

    def test_containing_halfplane_is_identity(self):
        h = HalfPlane.make(1.0, 0.0, 10.0)
        out = clip(TRIANGLE_T, h)
        assert set(out.vertices) == set(TRIANGLE_T.vertices)

    def test_disjoint_halfplane_gives_empty(self):
        h = HalfPlane.make(1.0, 0.0, -1.0)  # x <= -1
        assert clip(TRIANGLE_T, h).is_empty


class TestIntersect:
    def test_self_intersection(self):
        out = intersect(TRIANGLE_T, TRIANGLE_T)
        assert area(out) == pytest.approx(area(TRIANGLE_T), abs=1e-12)

    def test_halves_share_null_set(self):
        assert intersect(LEFT_HALF, RIGHT_HALF).is_empty

    def test_shifted_squares(self):
        other = geom2d.box(0.5, 0.0, 1.5, 1.0)
        assert area(intersect(UNIT_SQUARE, other)) == pytest.approx(0.5, abs=1e-12)


class TestAffineImage:
    def test_tent_branch_maps_left_onto_T(self):
        m = AffineMap2(Matrix2(1.0, 1.0, 1.0, -1.0), (0.0, 0.0))
        out = affine_image(m, LEFT_HALF)
        assert {snap_key(v) for v in out.vertices} == {
            snap_key(v) for v in TRIANGLE_T.vertices
        }

    def test_identity(self):
        ident = AffineMap2(Matrix2(1.0, 0.0, 0.0, 1.0), (0.0, 0.0))
        assert affine_image(ident, TRIANGLE_T).vertices == TRIANGLE_T.vertices

    def test_tent_branch_maps_right_onto_T(self):
        m = AffineMap2(Matrix2(-1.0, 1.0, -1.0, -1.0), (2.0, 2.0))
        out = affine_image(m, RIGHT_HALF)
        assert {snap_key(v) for v in out.vertices} == {
            snap_key(v) for v in TRIANGLE_T.vertices
        }

    def test_singular_rejected(self):
        bad = AffineMap2(Matrix2(1.0, 1.0, 1.0, 1.0), (0.0, 0.0))
        with pytest.raises(SingularMatrix):
            affine_image(bad, TRIANGLE_T)


class TestMatrixNorms:
    def test_inverse_tent_linear(self):
        m = Matrix2(1.0, 1.0, 1.0, -1.0).inverse()
        norms = matrix_norms(m)
        assert norms["spectral"] == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-14)
        assert norms["max_entry"] == pytest.approx(0.5, abs=1e-15)

    def test_identity(self):
        norms = matrix_norms(Matrix2(1.0, 0.0, 0.0, 1.0))
        assert norms["spectral"] == pytest.approx(1.0, abs=1e-15)
        assert norms["max_entry"] == 1.0

    def test_diagonal(self):
        norms = matrix_norms(Matrix2(2.0, 0.0, 0.0, 3.0))
        assert norms["spectral"] == pytest.approx(3.0, abs=1e-14)
        assert norms["max_entry"] == 3.0
        assert norms["det"] == pytest.approx(6.0, abs=1e-15)


class TestAngles:
    def test_square(self):
        assert min_interior_angle(UNIT_SQUARE) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_right_isoceles(self):
        assert min_interior_angle(LEFT_HALF) == pytest.approx(math.pi / 4, abs=1e-12)

    def test_equilateral(self):
        tri = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)))
        assert min_interior_angle(tri) == pytest.approx(math.pi / 3, abs=1e-12)

    def test_degenerate_raises(self):
        with pytest.raises(DegeneratePolygon):
            min_interior_angle(ConvexPolygon(()))


class TestInradius:
    def test_unit_square(self):
        assert inradius(UNIT_SQUARE) == pytest.approx(0.5, abs=1e-9)

    def test_right_triangle(self):
        tri = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0)))
        expected = (1.0 + 1.0 - math.sqrt(2.0)) / 2.0
        assert inradius(tri) == pytest.approx(expected, abs=1e-9)

    def test_rectangle(self):
        assert inradius(geom2d.box(0.0, 0.0, 2.0, 1.0)) == pytest.approx(0.5, abs=1e-9)

    def test_degenerate_raises(self):
        with pytest.raises(DegeneratePolygon):
            inradius(ConvexPolygon(()))


def test_non_convex_input_rejected():
    with pytest.raises(InvalidPolygon):
        ConvexPolygon(((0, 0), (2, 0), (1, 0.2), (2, 2)))
    with pytest.raises(InvalidPolygon):
        ConvexPolygon(((0, 0), (1, 1), (1, 0)))  # clockwise


# -- randomized invariants ---------------------------------------------------

finite_coord = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


@st.composite
def convex_polygons(draw, max_pts=9):
    pts = draw(
        st.lists(st.tuples(finite_coord, finite_coord), min_size=3, max_size=max_pts)
    )
    hull = convex_hull(pts)
    poly = ConvexPolygon(hull) if len(hull) >= 3 else ConvexPolygon(())
    if poly.is_empty or poly.area < 1e-4:
        # retry with a deterministic fallback shift to keep shrinking sane
        pts = [(x + 1.7 * i, y + 0.9 * (i % 3)) for i, (x, y) in enumerate(pts)]
        hull = convex_hull(pts)
        poly = ConvexPolygon(hull) if len(hull) >= 3 else ConvexPolygon(())
    if poly.is_empty or poly.area < 1e-4:
        poly = TRIANGLE_T
    return poly


@st.composite
def halfplanes(draw):
    angle = draw(st.floats(min_value=0.0, max_value=2.0 * math.pi))
    offset = draw(st.floats(min_value=-3.0, max_value=3.0))
    return HalfPlane.make(math.cos(angle), math.sin(angle), offset)


@given(convex_polygons(), halfplanes())
@settings(max_examples=150, deadline=None)
def test_area_additivity_under_clipping(poly, h):
    total = area(clip(poly, h)) + area(clip(poly, -h))
    assert abs(total - area(poly)) <= EPS_AREA


@given(
    convex_polygons(),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
)
@settings(max_examples=150, deadline=None)
def test_affine_area_scaling(poly, a, b, c, d):
    m = Matrix2(a, b, c, d)
    det = abs(m.det())
    if det <= 1e-6:
        return
    out = affine_image(AffineMap2(m, (0.3, -0.2)), poly)
    assert abs(area(out) - det * area(poly)) <= 1e-10 * max(1.0, det)


@given(convex_polygons(), convex_polygons())
@settings(max_examples=150, deadline=None)
def test_clipping_monotonicity(a, b):
    inter = intersect(a, b)
    assert area(inter) <= min(area(a), area(b)) + EPS_AREA


@given(convex_polygons(), convex_polygons())
@settings(max_examples=150, deadline=None)
def test_intersection_area_symmetry(a, b):
    assert abs(area(intersect(a, b)) - area(intersect(b, a))) <= EPS_AREA


@given(
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
)
@settings(max_examples=200, deadline=None)
def test_spectral_inverse_relation(a, b, c, d):
    m = Matrix2(a, b, c, d)
    if abs(m.det()) <= 1e-6:
        return
    s = matrix_norms(m)["spectral"]
    s_inv = matrix_norms(m.inverse())["spectral"]
    assert s * s_inv >= 1.0 - 1e-12
    assert s_inv >= 1.0 / s - 1e-12


@given(
    st.floats(min_value=0.05, max_value=3.0),
    st.floats(min_value=0.0, max_value=2.0 * math.pi),
    st.booleans(),
)
@settings(max_examples=100, deadline=None)
def test_conformal_spectral_norm(s, angle, reflect):
    c, sn = math.cos(angle), math.sin(angle)
    if reflect:
        m = Matrix2(s * c, s * sn, s * sn, -s * c)
    else:
        m = Matrix2(s * c, -s * sn, s * sn, s * c)
    assert matrix_norms(m)["spectral"] == pytest.approx(s, abs=1e-12)


def _quadrature(poly, ax, ay, n=600):
    xmin, ymin, xmax, ymax = poly.bbox()
    xs = np.linspace(xmin, xmax, n, endpoint=False) + (xmax - xmin) / (2 * n)
    ys = np.linspace(ymin, ymax, n, endpoint=False) + (ymax - ymin) / (2 * n)
    X, Y = np.meshgrid(xs, ys)
    inside = np.ones_like(X, dtype=bool)
    for (a, b) in poly.edges():
        dx, dy = b[0] - a[0], b[1] - a[1]
        inside &= dx * (Y - a[1]) - dy * (X - a[0]) >= 0
    w = (xmax - xmin) * (ymax - ymin) / (n * n)
    return float(np.sum(X**ax * Y**ay * inside) * w)


@pytest.mark.parametrize("ax,ay", [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
def test_monomial_integral_against_quadrature(ax, ay, rng):
    # unit square check is closed-form: integral = 1/((ax+1)(ay+1))
    exact = 1.0 / ((ax + 1) * (ay + 1))
    assert monomial_integral(UNIT_SQUARE, ax, ay) == pytest.approx(exact, abs=1e-14)
    for _ in range(3):
        poly = random_convex_polygon(rng, inside=TRIANGLE_T)
        approx = _quadrature(poly, ax, ay)
        assert monomial_integral(poly, ax, ay) == pytest.approx(approx, abs=5e-4)


def test_perimeter_triangle():
    assert perimeter(TRIANGLE_T) == pytest.approx(2.0 + 2.0 * math.sqrt(2.0), abs=1e-12)
