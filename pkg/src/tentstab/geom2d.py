"""Exact-at-tolerance planar convex geometry.

Convex polygons in strict counter-clockwise order, half-plane clipping,
pairwise intersection, affine images, interior angles, inradius, and
closed-form 2x2 matrix norms.  Everything here is an immutable value and
every function is pure, so values can be shared freely across threads.

Clipping predicates use exact floating-point sign tests (no epsilon), which
makes a polygon and its complement split against the same line bitwise
consistent; tolerances enter only when merging near-coincident vertices
(EPS_GEOM) and when normalizing slivers to Empty (EPS_AREA).
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, NamedTuple

import numpy as np
from scipy.optimize import linprog

from .errors import DegeneratePolygon, InvalidPolygon, SingularMatrix

EPS_GEOM = 1e-9   # vertex merge / containment tolerance
EPS_AREA = 1e-12  # polygons below this area are normalized to Empty
SNAP = 1e-9       # quantization grid used to identify shared vertices/edges


class Point2(NamedTuple):
    x: float
    y: float


def snap_key(p) -> tuple[int, int]:
    """Integer grid key identifying points that coincide up to SNAP."""
    return (round(p[0] / SNAP), round(p[1] / SNAP))


class Matrix2(NamedTuple):
    """Row-major 2x2 real matrix [[a, b], [c, d]]."""

    a: float
    b: float
    c: float
    d: float

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def mul(self, other: "Matrix2") -> "Matrix2":
        """Matrix product self @ other."""
        return Matrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def apply(self, x: float, y: float) -> tuple[float, float]:
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def inverse(self) -> "Matrix2":
        det = self.det()
        if abs(det) <= EPS_GEOM:
            raise SingularMatrix(f"matrix {self} has |det| = {abs(det)!r} <= {EPS_GEOM}")
        return Matrix2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def scale(self, s: float) -> "Matrix2":
        return Matrix2(self.a * s, self.b * s, self.c * s, self.d * s)


class AffineMap2(NamedTuple):
    """x -> linear @ x + shift; branches of piecewise maps are bijections."""

    linear: Matrix2
    shift: tuple[float, float]

    def apply(self, p) -> Point2:
        x, y = self.linear.apply(p[0], p[1])
        return Point2(x + self.shift[0], y + self.shift[1])

    def compose(self, inner: "AffineMap2") -> "AffineMap2":
        """self after inner: p -> self(inner(p))."""
        lin = self.linear.mul(inner.linear)
        sx, sy = self.linear.apply(inner.shift[0], inner.shift[1])
        return AffineMap2(lin, (sx + self.shift[0], sy + self.shift[1]))

    def inverse(self) -> "AffineMap2":
        inv = self.linear.inverse()
        sx, sy = inv.apply(self.shift[0], self.shift[1])
        return AffineMap2(inv, (-sx, -sy))


class HalfPlane(NamedTuple):
    """The closed set {p : normal . p <= offset}, with unit normal."""

    normal: tuple[float, float]
    offset: float

    @staticmethod
    def make(nx: float, ny: float, offset: float) -> "HalfPlane":
        nrm = math.hypot(nx, ny)
        if nrm <= EPS_GEOM:
            raise InvalidPolygon("half-plane normal must be nonzero")
        return HalfPlane((nx / nrm, ny / nrm), offset / nrm)

    def complement(self) -> "HalfPlane":
        """The closed complementary half-plane {p : normal . p >= offset}."""
        return HalfPlane((-self.normal[0], -self.normal[1]), -self.offset)

    def __neg__(self) -> "HalfPlane":
        return self.complement()


def _dedup(verts):
    """Merge consecutive vertices closer than EPS_GEOM (cyclically)."""
    if not verts:
        return ()
    out = []
    eps2 = EPS_GEOM * EPS_GEOM
    for v in verts:
        if out:
            dx = v[0] - out[-1][0]
            dy = v[1] - out[-1][1]
            if dx * dx + dy * dy <= eps2:
                continue
        out.append(v)
    while len(out) >= 2:
        dx = out[0][0] - out[-1][0]
        dy = out[0][1] - out[-1][1]
        if dx * dx + dy * dy <= eps2:
            out.pop()
        else:
            break
    return tuple(out)


def _shoelace(verts) -> float:
    s = 0.0
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


class ConvexPolygon:
    """Immutable convex polygon with CCW vertices; may be Empty.

    Construct via ``ConvexPolygon(vertices)`` for validated input, or the
    ``EMPTY`` singleton.  Vertices are plain (x, y) float pairs.
    """

    __slots__ = ("vertices", "_area")

    def __init__(self, vertices: Iterable = (), validate: bool = True):
        verts = _dedup([(float(p[0]), float(p[1])) for p in vertices])
        if len(verts) < 3 or abs(_shoelace(verts)) < EPS_AREA:
            verts = ()
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "_area", None)
        if validate and verts:
            for v in verts:
                if not (math.isfinite(v[0]) and math.isfinite(v[1])):
                    raise InvalidPolygon(f"non-finite vertex {v}")
            n = len(verts)
            for i in range(n):
                ax, ay = verts[i]
                bx, by = verts[(i + 1) % n]
                cx, cy = verts[(i + 2) % n]
                cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
                if cross < -EPS_GEOM:
                    raise InvalidPolygon(
                        "vertices must be convex in counter-clockwise order "
                        f"(cross product {cross!r} at vertex {i})"
                    )

    def __setattr__(self, name, value):
        raise AttributeError("ConvexPolygon is immutable")

    @staticmethod
    def _wrap(verts) -> "ConvexPolygon":
        """Fast constructor for vertices already known convex CCW."""
        return ConvexPolygon(verts, validate=False)

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @property
    def area(self) -> float:
        a = self._area
        if a is None:
            a = max(0.0, _shoelace(self.vertices)) if self.vertices else 0.0
            object.__setattr__(self, "_area", a)
        return a

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    def edges(self) -> Iterator[tuple[tuple[float, float], tuple[float, float]]]:
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            yield verts[i], verts[(i + 1) % n]

    def edge_halfplanes(self) -> Iterator[tuple[float, float, float]]:
        """Unnormalized (nx, ny, offset) with interior = {n . p <= offset}."""
        for (ax, ay), (bx, by) in self.edges():
            dx, dy = bx - ax, by - ay
            yield (dy, -dx, dy * ax - dx * ay)

    def contains(self, p, tol: float = EPS_GEOM) -> bool:
        """True if p lies in the polygon, inflated by tol (a distance)."""
        if not self.vertices:
            return False
        px, py = p[0], p[1]
        for (ax, ay), (bx, by) in self.edges():
            dx, dy = bx - ax, by - ay
            cross = dx * (py - ay) - dy * (px - ax)
            if cross < -tol * math.hypot(dx, dy):
                return False
        return True

    def centroid(self) -> Point2:
        verts = self.vertices
        if not verts:
            raise DegeneratePolygon("centroid of empty polygon")
        a = _shoelace(verts)
        if a < EPS_AREA:
            xs = sum(v[0] for v in verts) / len(verts)
            ys = sum(v[1] for v in verts) / len(verts)
            return Point2(xs, ys)
        cx = cy = 0.0
        n = len(verts)
        for i in range(n):
            x0, y0 = verts[i]
            x1, y1 = verts[(i + 1) % n]
            w = x0 * y1 - x1 * y0
            cx += (x0 + x1) * w
            cy += (y0 + y1) * w
        return Point2(cx / (6.0 * a), cy / (6.0 * a))

    def __eq__(self, other) -> bool:
        return isinstance(other, ConvexPolygon) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        if self.is_empty:
            return "ConvexPolygon.EMPTY"
        return f"ConvexPolygon({list(self.vertices)!r})"


EMPTY = ConvexPolygon(())
ConvexPolygon.EMPTY = EMPTY


def area(p: ConvexPolygon) -> float:
    """Shoelace area; 0 for Empty or degenerate input."""
    return p.area


def perimeter(p: ConvexPolygon) -> float:
    return sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in p.edges())


def _clip_verts(verts, nx: float, ny: float, off: float):
    """Sutherland-Hodgman step: keep {p : nx*x + ny*y <= off}.

    Sign tests are exact; a vertex exactly on the line is kept on both
    sides of a complementary pair of half-planes, and the crossing point
    for (n, off) and (-n, -off) is bitwise identical.
    """
    n = len(verts)
    if n == 0:
        return ()
    out = []
    px, py = verts[-1]
    dprev = off - (nx * px + ny * py)
    for cx, cy in verts:
        d = off - (nx * cx + ny * cy)
        if d >= 0.0:
            if dprev < 0.0:
                t = dprev / (dprev - d)
                out.append((px + t * (cx - px), py + t * (cy - py)))
            out.append((cx, cy))
        elif dprev >= 0.0:
            t = dprev / (dprev - d)
            out.append((px + t * (cx - px), py + t * (cy - py)))
        px, py, dprev = cx, cy, d
    return out


def clip(p: ConvexPolygon, h: HalfPlane) -> ConvexPolygon:
    """p intersected with the half-plane; Empty if the result is a sliver."""
    if p.is_empty:
        return EMPTY
    nx, ny = h.normal
    return ConvexPolygon._wrap(_clip_verts(p.vertices, nx, ny, h.offset))


def intersect(a: ConvexPolygon, b: ConvexPolygon) -> ConvexPolygon:
    """a ∩ b by clipping a against each edge half-plane of b."""
    if a.is_empty or b.is_empty:
        return EMPTY
    verts = a.vertices
    for nx, ny, off in b.edge_halfplanes():
        verts = _clip_verts(verts, nx, ny, off)
        if not verts:
            return EMPTY
    return ConvexPolygon._wrap(verts)


def affine_image(m: AffineMap2, p: ConvexPolygon) -> ConvexPolygon:
    """Vertex-wise image; orientation restored to CCW when det < 0."""
    det = m.linear.det()
    if abs(det) <= EPS_GEOM:
        raise SingularMatrix(f"affine map with |det| = {abs(det)!r} is not a bijection")
    if p.is_empty:
        return EMPTY
    verts = [m.apply(v) for v in p.vertices]
    if det < 0.0:
        verts.reverse()
    return ConvexPolygon._wrap(verts)


def matrix_norms(m: Matrix2) -> dict:
    """Closed-form 2x2 norms: largest singular value, max |entry|, det."""
    e = 0.5 * (m.a + m.d)
    f = 0.5 * (m.a - m.d)
    g = 0.5 * (m.c + m.b)
    h = 0.5 * (m.c - m.b)
    q = math.hypot(e, h)
    r = math.hypot(f, g)
    return {
        "spectral": q + r,
        "max_entry": max(abs(m.a), abs(m.b), abs(m.c), abs(m.d)),
        "det": m.det(),
    }


def min_interior_angle(p: ConvexPolygon) -> float:
    """Minimum interior angle in radians."""
    verts = p.vertices
    if len(verts) < 3 or p.area < EPS_AREA:
        raise DegeneratePolygon("interior angles need a non-degenerate polygon")
    best = math.pi
    n = len(verts)
    for i in range(n):
        vx, vy = verts[i]
        ux, uy = verts[i - 1][0] - vx, verts[i - 1][1] - vy
        wx, wy = verts[(i + 1) % n][0] - vx, verts[(i + 1) % n][1] - vy
        nu = math.hypot(ux, uy)
        nw = math.hypot(wx, wy)
        cosang = max(-1.0, min(1.0, (ux * wx + uy * wy) / (nu * nw)))
        best = min(best, math.acos(cosang))
    return best


def inradius(p: ConvexPolygon) -> float:
    """Radius of the largest inscribed disk, via a 3-variable LP.

    Maximizes r subject to n_i . x + r <= offset_i over the unit outward
    edge normals n_i.
    """
    verts = p.vertices
    if len(verts) < 3 or p.area < EPS_AREA:
        raise DegeneratePolygon("inradius needs a non-degenerate polygon")
    rows = []
    rhs = []
    for nx, ny, off in p.edge_halfplanes():
        nrm = math.hypot(nx, ny)
        rows.append([nx / nrm, ny / nrm, 1.0])
        rhs.append(off / nrm)
    res = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(None, None), (None, None), (0.0, None)],
        method="highs",
    )
    if not res.success:
        raise DegeneratePolygon(f"inradius LP failed: {res.message}")
    return float(res.x[2])


def monomial_integral(p: ConvexPolygon, ax: int, ay: int) -> float:
    """Exact integral of x^ax * y^ay over the polygon, for ax + ay <= 2.

    Fan triangulation plus the closed-form quadratic triangle formulas.
    """
    if ax + ay > 2 or ax < 0 or ay < 0:
        raise ValueError("monomial_integral supports total degree <= 2")
    verts = p.vertices
    if len(verts) < 3:
        return 0.0
    total = 0.0
    x0, y0 = verts[0]
    for i in range(1, len(verts) - 1):
        x1, y1 = verts[i]
        x2, y2 = verts[i + 1]
        a = 0.5 * ((x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0))
        if ax == 0 and ay == 0:
            total += a
        elif ax == 1 and ay == 0:
            total += a * (x0 + x1 + x2) / 3.0
        elif ax == 0 and ay == 1:
            total += a * (y0 + y1 + y2) / 3.0
        elif ax == 2 and ay == 0:
            total += a / 6.0 * (x0 * x0 + x1 * x1 + x2 * x2 + x0 * x1 + x0 * x2 + x1 * x2)
        elif ax == 0 and ay == 2:
            total += a / 6.0 * (y0 * y0 + y1 * y1 + y2 * y2 + y0 * y1 + y0 * y2 + y1 * y2)
        else:
            total += a / 12.0 * (
                (x0 + x1 + x2) * (y0 + y1 + y2) + x0 * y0 + x1 * y1 + x2 * y2
            )
    return total


def box(xmin: float, ymin: float, xmax: float, ymax: float) -> ConvexPolygon:
    """Axis-aligned rectangle as a CCW polygon."""
    return ConvexPolygon._wrap(((xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)))
