"""Planar polygon primitives.

Scalar, pure-Python reference versions of area, containment and rectangle
clipping. The batch kernels in :mod:`wardpop.kernels` do the same work over
whole raster windows; these functions are what the kernels are tested
against and what callers use for one-off geometry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Clip results smaller than this (map units squared) count as empty.
DEGENERATE_AREA = 1e-12


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point coordinates ({self.x}, {self.y})")


def _as_xy(v):
    if isinstance(v, Point):
        return float(v.x), float(v.y)
    x, y = v
    return float(x), float(y)


class Ring:
    """Closed ring of vertices; the closing vertex is not stored.

    Accepts Points or (x, y) pairs. A repeated closing vertex and runs of
    consecutive duplicates are dropped.
    """

    __slots__ = ("coords",)

    def __init__(self, vertices):
        pts = [_as_xy(v) for v in vertices]
        deduped = []
        for p in pts:
            if not deduped or p != deduped[-1]:
                deduped.append(p)
        while len(deduped) > 1 and deduped[0] == deduped[-1]:
            deduped.pop()
        arr = np.array(deduped, dtype=np.float64).reshape(-1, 2)
        if not np.all(np.isfinite(arr)):
            raise ValueError("ring has non-finite coordinates")
        if len({tuple(p) for p in deduped}) < 3:
            raise ValueError("ring needs at least 3 distinct vertices")
        arr.setflags(write=False)
        self.coords = arr

    @property
    def vertices(self):
        return [Point(x, y) for x, y in self.coords]

    def __len__(self):
        return self.coords.shape[0]

    def __repr__(self):
        return f"Ring({self.coords.tolist()!r})"

    def __eq__(self, other):
        return isinstance(other, Ring) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())

    def signed_area(self):
        return _shoelace(self.coords[:, 0], self.coords[:, 1])

    def bounds(self):
        lo = self.coords.min(axis=0)
        hi = self.coords.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def _shoelace(xs, ys):
    n = len(xs)
    s = 0.0
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        s += xs[i] * ys[j] - xs[j] * ys[i]
    return 0.5 * s


@dataclass(frozen=True)
class Polygon:
    exterior: Ring
    holes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.exterior, Ring):
            object.__setattr__(self, "exterior", Ring(self.exterior))
        holes = tuple(h if isinstance(h, Ring) else Ring(h) for h in self.holes)
        object.__setattr__(self, "holes", holes)
        ext = abs(self.exterior.signed_area())
        if not ext > 0.0:
            raise ValueError("polygon exterior has zero area")
        for h in holes:
            if abs(h.signed_area()) > ext:
                raise ValueError("hole larger than exterior")

    @property
    def rings(self):
        return (self.exterior,) + self.holes

    def bounds(self):
        return self.exterior.bounds()


@dataclass(frozen=True)
class Rect:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        if not (self.max_x > self.min_x and self.max_y > self.min_y):
            raise ValueError(f"degenerate rect {self}")

    @property
    def area(self):
        return (self.max_x - self.min_x) * (self.max_y - self.min_y)

    def as_polygon(self):
        return Polygon(
            Ring(
                [
                    (self.min_x, self.min_y),
                    (self.max_x, self.min_y),
                    (self.max_x, self.max_y),
                    (self.min_x, self.max_y),
                ]
            )
        )


def polygon_area(p: Polygon) -> float:
    area = abs(p.exterior.signed_area())
    for h in p.holes:
        area -= abs(h.signed_area())
    return max(area, 0.0)


def _on_segment(px, py, ax, ay, bx, by):
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if cross != 0.0:
        return False
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def point_in_polygon(pt, p: Polygon) -> bool:
    """Even-odd containment; points on any ring's boundary count as inside."""
    px, py = _as_xy(pt)
    inside = False
    for ring in p.rings:
        xs = ring.coords[:, 0]
        ys = ring.coords[:, 1]
        n = len(xs)
        for i in range(n):
            j = i + 1 if i + 1 < n else 0
            ax, ay, bx, by = xs[i], ys[i], xs[j], ys[j]
            if _on_segment(px, py, ax, ay, bx, by):
                return True
            if (ay > py) != (by > py):
                xint = ax + (py - ay) * (bx - ax) / (by - ay)
                if px < xint:
                    inside = not inside
    return inside


def _clip_half(pts, axis, bound, keep_greater):
    out = []
    n = len(pts)
    if n == 0:
        return out

    def inside(q):
        return q[axis] >= bound if keep_greater else q[axis] <= bound

    s = pts[-1]
    s_in = inside(s)
    for e in pts:
        e_in = inside(e)
        if e_in != s_in:
            t = (bound - s[axis]) / (e[axis] - s[axis])
            if axis == 0:
                out.append((bound, s[1] + t * (e[1] - s[1])))
            else:
                out.append((s[0] + t * (e[0] - s[0]), bound))
        if e_in:
            out.append(e)
        s, s_in = e, e_in
    return out


def clip_ring_to_rect(ring: Ring, r: Rect):
    """Sutherland-Hodgman against the four sides of ``r``.

    Returns a vertex list (possibly empty). For a concave ring the output
    may contain zero-width bridges along the rect boundary; its signed area
    is still exactly that of the intersection.
    """
    pts = [tuple(v) for v in ring.coords.tolist()]
    pts = _clip_half(pts, 0, r.min_x, True)
    pts = _clip_half(pts, 0, r.max_x, False)
    pts = _clip_half(pts, 1, r.min_y, True)
    pts = _clip_half(pts, 1, r.max_y, False)
    return pts


def _ring_or_none(pts):
    if len(pts) < 3:
        return None
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    if abs(_shoelace(xs, ys)) < DEGENERATE_AREA:
        return None
    try:
        return Ring(pts)
    except ValueError:
        return None


def clip_polygon_to_rect(p: Polygon, r: Rect):
    """Intersection of ``p`` and ``r``; ``None`` when empty or degenerate."""
    ext = _ring_or_none(clip_ring_to_rect(p.exterior, r))
    if ext is None:
        return None
    holes = []
    for h in p.holes:
        ch = _ring_or_none(clip_ring_to_rect(h, r))
        if ch is not None:
            holes.append(ch)
    try:
        out = Polygon(ext, tuple(holes))
    except ValueError:
        return None
    if polygon_area(out) < DEGENERATE_AREA:
        return None
    return out
