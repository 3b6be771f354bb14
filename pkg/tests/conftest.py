"""Shared fixtures and generators for the test suite."""

import functools

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")

from tentstab import density as density_mod
from tentstab import maps as maps_mod
from tentstab.geom2d import ConvexPolygon

TRIANGLE_T = ConvexPolygon(((0.0, 0.0), (2.0, 0.0), (1.0, 1.0)))
LEFT_HALF = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0)))
RIGHT_HALF = ConvexPolygon(((1.0, 0.0), (2.0, 0.0), (1.0, 1.0)))


@pytest.fixture
def region():
    return TRIANGLE_T


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


def convex_hull(points):
    """Andrew monotone chain; returns CCW hull vertices."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) < 3:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


def random_convex_polygon(rng, inside=None, npts=8, min_area=1e-3):
    """Random convex polygon, optionally inside a convex container."""
    while True:
        if inside is None:
            pts = rng.uniform(-2.0, 2.0, size=(npts, 2))
        else:
            pts = []
            while len(pts) < npts:
                u, v = rng.random(2)
                if u + v > 1.0:
                    u, v = 1.0 - u, 1.0 - v
                pts.append((2.0 * u + v, v))
            pts = np.array(pts)
        hull = convex_hull(pts)
        if len(hull) < 3:
            continue
        poly = ConvexPolygon(hull)
        if poly.area >= min_area:
            return poly


def random_grid_density(rng, region, n):
    """Nonnegative piecewise-constant density on an n-grid, mass 1."""
    grid = density_mod.UlamGrid.build(region, n)
    values = rng.uniform(0.1, 2.0, size=len(grid.cells))
    mass = sum(v * c.area for v, c in zip(values, grid.cells))
    cells = tuple(
        (cell, float(v / mass)) for cell, v in zip(grid.cells, values)
    )
    return density_mod.PiecewisePolyDensity(region, cells)


@functools.lru_cache(maxsize=32)
def cached_ulam(t, resolution, power=1):
    m = maps_mod.tent_power(t, power)
    return density_mod.build_ulam(m, resolution)


@functools.lru_cache(maxsize=32)
def cached_fixed(t, resolution, power=1, tol=1e-9):
    op = cached_ulam(t, resolution, power)
    return op, density_mod.ulam_fixed(op, tol)
