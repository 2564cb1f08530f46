"""Exact planar primitives on a quantized integer grid.

Coordinates are integer multiples of ``GRID_M`` meters (centimeters). All
incidence predicates (orientation, segment intersection, hull membership,
visibility) run in exact integer arithmetic; only the minimum enclosing circle
and metric distances are computed in floating point.
"""
from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, Sequence

from .errors import DegenerateInput, EmptyInput, PointInsideHull

GRID_M = 0.01
DEFAULT_SEED = 0

# local equirectangular scale factors (meters per degree)
M_PER_DEG_LON = 111320.0
M_PER_DEG_LAT = 110540.0


@dataclass(frozen=True)
class PlanarPoint:
    x: int
    y: int
    id: Optional[Hashable] = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.x, int) or not isinstance(self.y, int):
            raise TypeError(f"coordinates must be integers, got ({self.x!r}, {self.y!r})")

    @property
    def xy(self) -> tuple[int, int]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Segment:
    a: PlanarPoint
    b: PlanarPoint

    def __post_init__(self):
        if self.a == self.b:
            raise DegenerateInput(f"zero-length segment at {self.a.xy}")


@dataclass(frozen=True)
class Hull:
    """Convex hull, vertices counterclockwise, collinear boundary points dropped."""

    vertices: tuple[PlanarPoint, ...]

    @property
    def edges(self) -> list[Segment]:
        n = len(self.vertices)
        return [Segment(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]

    def __len__(self):
        return len(self.vertices)


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    def contains(self, x: float, y: float, rel_tol: float = 1e-9) -> bool:
        return math.hypot(x - self.center[0], y - self.center[1]) <= self.radius * (1 + rel_tol) + 1e-12


class Orientation(enum.IntEnum):
    CW = -1
    COLLINEAR = 0
    CCW = 1


class IntersectionKind(enum.Enum):
    NONE = "None"
    SHARED_ENDPOINT_ONLY = "SharedEndpointOnly"
    PROPER_INTERIOR = "ProperInterior"
    COLLINEAR_OVERLAP = "CollinearOverlap"


# ---------------------------------------------------------------------------
# raw-tuple kernels; the public wrappers below delegate here

def cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _on_segment(a, b, p) -> bool:
    """p collinear with a-b is assumed; closed-segment containment."""
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def strictly_between(a, b, p) -> bool:
    """True iff p lies on the open segment a-b."""
    if cross(a, b, p) != 0 or p == a or p == b:
        return False
    return _on_segment(a, b, p)


def classify(a, b, c, d) -> IntersectionKind:
    d1 = _sign(cross(a, b, c))
    d2 = _sign(cross(a, b, d))
    d3 = _sign(cross(c, d, a))
    d4 = _sign(cross(c, d, b))
    if d1 == 0 and d2 == 0:
        # collinear supports: compare along the dominant axis
        k = 0 if a[0] != b[0] else 1
        lo1, hi1 = sorted((a[k], b[k]))
        lo2, hi2 = sorted((c[k], d[k]))
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if lo < hi:
            return IntersectionKind.COLLINEAR_OVERLAP
        if lo == hi:
            return IntersectionKind.SHARED_ENDPOINT_ONLY
        return IntersectionKind.NONE
    if d1 * d2 < 0 and d3 * d4 < 0:
        return IntersectionKind.PROPER_INTERIOR
    if (d1 == 0 and _on_segment(a, b, c)) or (d2 == 0 and _on_segment(a, b, d)) \
            or (d3 == 0 and _on_segment(c, d, a)) or (d4 == 0 and _on_segment(c, d, b)):
        return IntersectionKind.SHARED_ENDPOINT_ONLY
    return IntersectionKind.NONE


def hull_chain(pts: Sequence[tuple[int, int]], idx: Optional[Iterable[int]] = None) -> list[int]:
    """Indices of the strict convex hull of ``pts[idx]``, counterclockwise.

    Degenerate inputs give degenerate chains: one index for a single point,
    the two extreme indices for a collinear set. Points must be distinct.
    """
    order = sorted(range(len(pts)) if idx is None else idx, key=lambda i: pts[i])
    if len(order) <= 2:
        return order
    lower: list[int] = []
    for i in order:
        while len(lower) >= 2 and cross(pts[lower[-2]], pts[lower[-1]], pts[i]) <= 0:
            lower.pop()
        lower.append(i)
    upper: list[int] = []
    for i in reversed(order):
        while len(upper) >= 2 and cross(pts[upper[-2]], pts[upper[-1]], pts[i]) <= 0:
            upper.pop()
        upper.append(i)
    chain = lower[:-1] + upper[:-1]
    if len(chain) < 3:
        return [order[0], order[-1]]
    return chain


def sees(chain_xy: Sequence[tuple[int, int]], pos: int, q) -> bool:
    """Does the segment from hull vertex ``chain_xy[pos]`` to ``q`` meet the hull only there?

    At a proper convex vertex this holds iff the direction towards q leaves
    the closed interior cone, i.e. q is strictly right of one incident edge.
    Grazing along an edge counts as collinear overlap and blocks.
    """
    h = len(chain_xy)
    v = chain_xy[pos]
    if h == 1:
        return q != v
    if h == 2:
        o = chain_xy[1 - pos]
        if cross(v, o, q) != 0:
            return True
        return (q[0] - v[0]) * (o[0] - v[0]) + (q[1] - v[1]) * (o[1] - v[1]) < 0
    nxt = chain_xy[(pos + 1) % h]
    prv = chain_xy[pos - 1]
    return cross(v, nxt, q) < 0 or cross(prv, v, q) < 0


def inside_or_on(chain_xy: Sequence[tuple[int, int]], q) -> bool:
    """Closed-hull membership for a chain produced by ``hull_chain``."""
    h = len(chain_xy)
    if h == 1:
        return q == chain_xy[0]
    if h == 2:
        return cross(chain_xy[0], chain_xy[1], q) == 0 and _on_segment(chain_xy[0], chain_xy[1], q)
    return all(cross(chain_xy[i], chain_xy[(i + 1) % h], q) >= 0 for i in range(h))


# ---------------------------------------------------------------------------
# public surface

def orientation(p: PlanarPoint, q: PlanarPoint, r: PlanarPoint) -> Orientation:
    return Orientation(_sign(cross(p.xy, q.xy, r.xy)))


def classify_intersection(s1: Segment, s2: Segment) -> IntersectionKind:
    return classify(s1.a.xy, s1.b.xy, s2.a.xy, s2.b.xy)


def convex_hull(points: Sequence[PlanarPoint]) -> Hull:
    uniq = list({p.xy: p for p in points}.values())
    if len(uniq) < 3:
        raise DegenerateInput(f"hull needs 3 distinct points, got {len(uniq)}")
    chain = hull_chain([p.xy for p in uniq])
    if len(chain) < 3:
        raise DegenerateInput("all points are collinear")
    return Hull(tuple(uniq[i] for i in chain))


def visible_hull_vertices(p: PlanarPoint, hull: Hull) -> set[PlanarPoint]:
    """Hull vertices P_k such that the segment p-P_k touches the hull only at P_k."""
    chain = [v.xy for v in hull.vertices]
    if inside_or_on(chain, p.xy):
        raise PointInsideHull(f"{p.xy} is not strictly outside the hull")
    return {v for k, v in enumerate(hull.vertices) if sees(chain, k, p.xy)}


# ---------------------------------------------------------------------------
# minimum enclosing circle (randomized incremental, expected linear time)

_MEC_EPS = 1 + 1e-14


def _in_circle(c, p) -> bool:
    return c is not None and math.hypot(p[0] - c[0], p[1] - c[1]) <= c[2] * _MEC_EPS


def _diameter(a, b):
    cx, cy = (a[0] + b[0]) / 2, (a[1] + b[1]) / 2
    return (cx, cy, max(math.hypot(cx - a[0], cy - a[1]), math.hypot(cx - b[0], cy - b[1])))


def _circumcircle(a, b, c):
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2
    if d == 0:
        return None
    x = ox + ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    y = oy + ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    r = max(math.hypot(x - a[0], y - a[1]), math.hypot(x - b[0], y - b[1]), math.hypot(x - c[0], y - c[1]))
    return (x, y, r)


def _circle_two(pts, p, q):
    circ = _diameter(p, q)
    left = right = None
    for r in pts:
        if _in_circle(circ, r):
            continue
        cr = cross(p, q, r)
        c = _circumcircle(p, q, r)
        if c is None:
            continue
        side = cross(p, q, (c[0], c[1]))
        if cr > 0 and (left is None or side > cross(p, q, (left[0], left[1]))):
            left = c
        elif cr < 0 and (right is None or side < cross(p, q, (right[0], right[1]))):
            right = c
    if left is None and right is None:
        return circ
    if left is None:
        return right
    if right is None:
        return left
    return left if left[2] <= right[2] else right


def _circle_one(pts, p):
    c = (p[0], p[1], 0.0)
    for i, q in enumerate(pts):
        if not _in_circle(c, q):
            c = _diameter(p, q) if c[2] == 0.0 else _circle_two(pts[: i + 1], p, q)
    return c


def min_enclosing_circle(points: Sequence[PlanarPoint], seed: int = DEFAULT_SEED) -> Circle:
    """Smallest circle (in grid units) containing every point.

    Only hull vertices can support the circle, so the randomized incremental
    pass runs on the hull. The shuffle is seeded for reproducibility.
    """
    if not points:
        raise EmptyInput("min_enclosing_circle needs at least one point")
    xy = sorted({p.xy for p in points})
    if len(xy) > 3:
        xy = [xy[i] for i in hull_chain(xy)]
    rng = random.Random(seed)
    rng.shuffle(xy)
    c = None
    for i, p in enumerate(xy):
        if c is None or not _in_circle(c, p):
            c = _circle_one(xy[: i + 1], p)
    return Circle((c[0], c[1]), c[2])


# ---------------------------------------------------------------------------
# projection and quantization

@dataclass(frozen=True)
class Projection:
    """Local equirectangular projection about (lat0, lon0) onto the centimeter grid."""

    lat0: float
    lon0: float

    @classmethod
    def for_box(cls, box) -> "Projection":
        min_lat, min_lon, max_lat, max_lon = box
        return cls((min_lat + max_lat) / 2, (min_lon + max_lon) / 2)

    @property
    def _kx(self) -> float:
        return math.cos(math.radians(self.lat0)) * M_PER_DEG_LON

    def to_meters(self, lon: float, lat: float) -> tuple[float, float]:
        return (lon - self.lon0) * self._kx, (lat - self.lat0) * M_PER_DEG_LAT

    def quantize(self, lon: float, lat: float, id=None) -> PlanarPoint:
        x, y = self.to_meters(lon, lat)
        return PlanarPoint(round(x / GRID_M), round(y / GRID_M), id)

    def to_lonlat(self, x: int, y: int) -> tuple[float, float]:
        return self.lon0 + x * GRID_M / self._kx, self.lat0 + y * GRID_M / M_PER_DEG_LAT


def quantize_xy(x: float, y: float, id=None) -> PlanarPoint:
    """Snap a grid-unit float coordinate to the nearest grid point."""
    return PlanarPoint(int(round(x)), int(round(y)), id)


def distance_m(a, b) -> float:
    """Euclidean distance in meters between two grid coordinates."""
    return math.hypot(a[0] - b[0], a[1] - b[1]) * GRID_M
