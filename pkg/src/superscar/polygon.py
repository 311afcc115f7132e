"""Rational polygons, their dihedral groups and the unfolded translation surface.

A chart of the surface is the polygon ``g P`` for a group element ``g``; the
chart index is the index of ``g`` in :attr:`DihedralGroup.elements`.  Edge ``i``
of chart ``g`` is glued to edge ``i`` of chart ``g s_i`` where ``s_i`` is the
linear reflection fixing the direction of edge ``i`` of ``P``.  Straight-line
flow is computed chart by chart; crossing an edge only adds a translation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    AngleSumMismatch,
    GluingNotTranslation,
    HitConePoint,
    InputError,
    NonClosing,
    SelfIntersecting,
)

CONE_TOL = 1e-10
GLUE_TOL = 1e-12


@dataclass(frozen=True)
class RationalAngle:
    """Interior angle ``pi * numerator / denominator`` in lowest terms."""

    numerator: int
    denominator: int

    def __post_init__(self):
        if self.denominator <= 0:
            raise InputError("angle denominator must be positive")
        frac = Fraction(self.numerator, self.denominator)
        object.__setattr__(self, "numerator", frac.numerator)
        object.__setattr__(self, "denominator", frac.denominator)
        if not 0 < frac < 2:
            raise InputError(f"interior angle pi*{frac} outside (0, 2pi)")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def radians(self) -> float:
        return math.pi * self.numerator / self.denominator

    @classmethod
    def coerce(cls, value) -> "RationalAngle":
        if isinstance(value, RationalAngle):
            return value
        if isinstance(value, Fraction):
            return cls(value.numerator, value.denominator)
        p, q = value
        return cls(int(p), int(q))


@dataclass(frozen=True)
class RationalPolygon:
    angles: tuple[RationalAngle, ...]
    edge_lengths: tuple[float, ...]
    vertices: np.ndarray = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.angles)

    @property
    def N(self) -> int:
        """lcm of the angle denominators."""
        return reduce(math.lcm, (a.denominator for a in self.angles), 1)

    @property
    def perimeter(self) -> float:
        return float(sum(self.edge_lengths))

    @property
    def area(self) -> float:
        return abs(_signed_area(self.vertices))

    def edge_turn(self, i: int) -> Fraction:
        """Direction of edge ``i`` as a multiple of pi (exact)."""
        return Fraction(i) - sum((self.angles[j].fraction for j in range(1, i + 1)), Fraction(0))

    def edge_line_index(self, i: int) -> int:
        """Index ``k`` such that edge ``i`` is parallel to the line at angle ``pi k / N``."""
        k = self.edge_turn(i) * self.N
        assert k.denominator == 1
        return int(k.numerator) % self.N


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_cross(p1, p2, q1, q2, tol=1e-12) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and (
        (d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)
    ):
        return True

    def on_seg(a, b, c):
        return abs(orient(a, b, c)) <= tol and min(a[0], b[0]) - tol <= c[0] <= max(a[0], b[0]) + tol and min(
            a[1], b[1]
        ) - tol <= c[1] <= max(a[1], b[1]) + tol

    return on_seg(q1, q2, p1) or on_seg(q1, q2, p2) or on_seg(p1, p2, q1) or on_seg(p1, p2, q2)


def build_polygon(angles: Sequence, edge_lengths: Sequence[float]) -> RationalPolygon:
    """Lay out a polygon from exact interior angles and edge lengths.

    Vertex 0 sits at the origin, edge 0 points along +x and the boundary is
    traversed counterclockwise; ``angles[i]`` is the interior angle at vertex
    ``i`` and edge ``i`` joins vertex ``i`` to vertex ``i+1``.
    """
    angles = tuple(RationalAngle.coerce(a) for a in angles)
    lengths = tuple(float(x) for x in edge_lengths)
    n = len(angles)
    if n < 3 or len(lengths) != n:
        raise InputError("need n >= 3 angles and the same number of edge lengths")
    if any(not (x > 0 and math.isfinite(x)) for x in lengths):
        raise InputError("edge lengths must be positive and finite")
    total = sum((a.fraction for a in angles), Fraction(0))
    if total != n - 2:
        raise AngleSumMismatch(f"angle sum is {total}*pi, expected {n - 2}*pi")

    verts = np.zeros((n + 1, 2))
    turn = Fraction(0)
    for i in range(n):
        if i > 0:
            turn += 1 - angles[i].fraction
        theta = math.pi * float(turn % 2)
        verts[i + 1] = verts[i] + lengths[i] * np.array([math.cos(theta), math.sin(theta)])
    perimeter = sum(lengths)
    gap = float(np.hypot(*verts[n]))
    if gap > 1e-12 * perimeter:
        raise NonClosing(f"edge lengths do not close the polygon (gap {gap:.3e})")
    verts = verts[:n].copy()
    # snap tiny float noise so that axis-aligned polygons stay exact
    verts[np.abs(verts) < 1e-15 * perimeter] = 0.0

    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(verts[i], verts[(i + 1) % n], verts[j], verts[(j + 1) % n]):
                raise SelfIntersecting(f"edges {i} and {j} intersect")
    if _signed_area(verts) <= 0:
        raise SelfIntersecting("boundary is not counterclockwise")
    return RationalPolygon(angles, lengths, verts)


@dataclass(frozen=True)
class GroupElement:
    """Rotation by ``2 pi rot / N``, or with ``reflect`` set the reflection
    ``Rot(2 pi rot / N) @ diag(1, -1)`` across the line at angle ``pi rot / N``."""

    rot: int
    reflect: bool

    @property
    def parity(self) -> int:
        return -1 if self.reflect else 1


class DihedralGroup:
    """Finite group generated by the reflections in the polygon's edge lines."""

    def __init__(self, N: int, generators: Sequence[GroupElement]):
        self.N = N
        identity = GroupElement(0, False)
        elements = [identity]
        index = {identity: 0}
        frontier = [identity]
        while frontier:
            nxt = []
            for g in frontier:
                for s in generators:
                    h = self.compose_elements(g, s)
                    if h not in index:
                        index[h] = len(elements)
                        elements.append(h)
                        nxt.append(h)
            frontier = nxt
        self.elements: list[GroupElement] = elements
        self._index = index
        self.generators = tuple(generators)
        self._mats = np.array([self._matrix(g) for g in elements])
        m = len(elements)
        self.table = np.empty((m, m), dtype=np.int64)
        for i, a in enumerate(elements):
            for j, b in enumerate(elements):
                self.table[i, j] = index[self.compose_elements(a, b)]

    def compose_elements(self, a: GroupElement, b: GroupElement) -> GroupElement:
        N = self.N
        if not a.reflect and not b.reflect:
            return GroupElement((a.rot + b.rot) % N, False)
        if not a.reflect and b.reflect:
            return GroupElement((a.rot + b.rot) % N, True)
        if a.reflect and not b.reflect:
            return GroupElement((a.rot - b.rot) % N, True)
        return GroupElement((a.rot - b.rot) % N, False)

    def _matrix(self, g: GroupElement) -> np.ndarray:
        phi = 2 * math.pi * g.rot / self.N
        c, s = math.cos(phi), math.sin(phi)
        rot = np.array([[c, -s], [s, c]])
        return rot @ np.diag([1.0, -1.0]) if g.reflect else rot

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, g: GroupElement) -> int:
        return self._index[g]

    def matrix(self, i: int) -> np.ndarray:
        return self._mats[i]

    @property
    def matrices(self) -> np.ndarray:
        return self._mats

    def compose(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def inverse(self, i: int) -> int:
        return int(np.nonzero(self.table[i] == 0)[0][0])

    def verify_closure(self, tol: float = 1e-12) -> bool:
        """Check the index table against matrix products and element orders."""
        mats = self._mats
        for i in range(len(self)):
            for j in range(len(self)):
                if not np.allclose(mats[i] @ mats[j], mats[self.table[i, j]], atol=tol):
                    return False
        two_n = 2 * self.N
        for i in range(len(self)):
            power = np.eye(2)
            for _ in range(two_n):
                power = power @ mats[i]
            if not np.allclose(power, np.eye(2), atol=1e-9):
                return False
        return True


def reflection_in_edge(poly: RationalPolygon, i: int) -> GroupElement:
    return GroupElement(poly.edge_line_index(i), True)


def dihedral_group(poly: RationalPolygon) -> DihedralGroup:
    gens = []
    for i in range(poly.n):
        s = reflection_in_edge(poly, i)
        if s not in gens:
            gens.append(s)
    return DihedralGroup(poly.N, gens)


@dataclass(frozen=True)
class SurfacePoint:
    chart_id: int
    position: tuple[float, float]

    @property
    def xy(self) -> np.ndarray:
        return np.array(self.position, dtype=float)

    @classmethod
    def make(cls, chart_id: int, xy) -> "SurfacePoint":
        return cls(int(chart_id), (float(xy[0]), float(xy[1])))


@dataclass(frozen=True)
class Chart:
    index: int
    vertices: np.ndarray = field(repr=False)
    orientation: int  # +1 counterclockwise, -1 clockwise


@dataclass(frozen=True)
class Gluing:
    chart: int
    edge: int
    target_chart: int
    target_edge: int
    shift: tuple[float, float]  # point on the edge maps to point + shift


@dataclass(frozen=True)
class ConePoint:
    point: SurfacePoint
    multiplicity: int  # cone angle is 2 pi * multiplicity

    @property
    def angle(self) -> float:
        return 2 * math.pi * self.multiplicity


@dataclass
class Segment:
    """One straight piece of a trajectory inside a single chart."""

    chart: int
    start: np.ndarray
    end: np.ndarray
    s0: float
    s1: float
    offset: np.ndarray  # developed position = chart position + offset


class TranslationSurface:
    def __init__(self, polygon: RationalPolygon, group: DihedralGroup):
        self.polygon = polygon
        self.group = group
        P = polygon.vertices
        n = polygon.n
        self.charts: list[Chart] = []
        for gi in range(len(group)):
            m = group.matrix(gi)
            self.charts.append(Chart(gi, P @ m.T, group.elements[gi].parity))

        refl_idx = [group.index(reflection_in_edge(polygon, i)) for i in range(n)]
        self.gluings: dict[tuple[int, int], Gluing] = {}
        for c in self.charts:
            for i in range(n):
                tgt = group.compose(c.index, refl_idx[i])
                a, b = c.vertices[i], c.vertices[(i + 1) % n]
                ta, tb = self.charts[tgt].vertices[i], self.charts[tgt].vertices[(i + 1) % n]
                shift = ta - a
                scale = max(1.0, float(np.abs(P).max()))
                if np.abs((tb - ta) - (b - a)).max() > GLUE_TOL * scale:
                    raise GluingNotTranslation(f"chart {c.index} edge {i}: edge vectors differ")
                if np.abs(tb - (b + shift)).max() > GLUE_TOL * scale:
                    raise GluingNotTranslation(f"chart {c.index} edge {i}: endpoints mismatch")
                self.gluings[(c.index, i)] = Gluing(c.index, i, tgt, i, (float(shift[0]), float(shift[1])))
        for (c, i), glu in self.gluings.items():
            back = self.gluings[(glu.target_chart, glu.target_edge)]
            if back.target_chart != c or back.target_edge != i:
                raise GluingNotTranslation("gluing is not an involution")

        self._vertex_classes()
        self.area = len(group) * polygon.area
        self._diameter = float(
            max(np.max(np.hypot(*(P[:, None, :] - P[None, :, :]).transpose(2, 0, 1))), 1e-300)
        )

    # -- combinatorics -------------------------------------------------
    def _vertex_classes(self):
        n = self.polygon.n
        parent = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

        for c in range(len(self.charts)):
            for j in range(n):
                find((c, j))
                # edge j starts at vertex j, edge j-1 ends at vertex j
                union((c, j), (self.gluings[(c, j)].target_chart, j))
                union((c, j), (self.gluings[(c, (j - 1) % n)].target_chart, j))
        classes: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for key in sorted(parent):
            classes.setdefault(find(key), []).append(key)
        self.vertex_class: dict[tuple[int, int], int] = {}
        self.vertex_classes: list[list[tuple[int, int]]] = []
        self.vertex_multiplicity: list[int] = []
        self.cone_points: list[ConePoint] = []
        for cid, (root, members) in enumerate(sorted(classes.items())):
            j = members[0][1]
            total = len(members) * self.polygon.angles[j].fraction  # in units of pi
            if (total / 2).denominator != 1:
                raise GluingNotTranslation(f"vertex class total angle {total}*pi is not a multiple of 2pi")
            k = int(total / 2)
            self.vertex_classes.append(members)
            self.vertex_multiplicity.append(k)
            for m in members:
                self.vertex_class[m] = cid
            if k >= 2:
                c0, j0 = members[0]
                self.cone_points.append(ConePoint(SurfacePoint.make(c0, self.charts[c0].vertices[j0]), k))
        excess = sum(k - 1 for k in self.vertex_multiplicity)
        if excess % 2:
            raise GluingNotTranslation("Gauss-Bonnet excess is not an even multiple of 2pi")
        self.genus = 1 + excess // 2
        chi = len(self.vertex_classes) - len(self.charts) * n // 2 + len(self.charts)
        if chi != 2 - 2 * self.genus:
            raise GluingNotTranslation("Euler characteristic disagrees with Gauss-Bonnet")

    def is_cone_vertex(self, chart: int, j: int) -> bool:
        return self.vertex_multiplicity[self.vertex_class[(chart, j)]] >= 2

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus

    @property
    def diameter(self) -> float:
        """Diameter of a single chart (the polygon)."""
        return self._diameter

    @property
    def n_charts(self) -> int:
        return len(self.charts)

    def cone_angle_excess(self) -> float:
        return sum(2 * math.pi * (k - 1) for k in self.vertex_multiplicity)

    def verify_group_action(self) -> bool:
        """Each g permutes the chart set: g (h P) = (g h) P."""
        for gi in range(len(self.group)):
            m = self.group.matrix(gi)
            for c in self.charts:
                img = c.vertices @ m.T
                tgt = self.charts[self.group.compose(gi, c.index)]
                if not np.allclose(img, tgt.vertices, atol=1e-12):
                    return False
        return True

    def act(self, group_index: int, point: SurfacePoint) -> SurfacePoint:
        """Isometric action of the dihedral group on the surface."""
        m = self.group.matrix(group_index)
        return SurfacePoint.make(self.group.compose(group_index, point.chart_id), m @ point.xy)

    # -- points ------------------------------------------------------------
    def contains(self, chart: int, xy, tol: float = 1e-12) -> bool:
        v = self.charts[chart].vertices
        x, y = float(xy[0]), float(xy[1])
        n = len(v)
        inside = False
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            ab = b - a
            t = np.clip(np.dot([x - a[0], y - a[1]], ab) / np.dot(ab, ab), 0, 1)
            if math.hypot(x - a[0] - t * ab[0], y - a[1] - t * ab[1]) <= tol:
                return True
            if (a[1] > y) != (b[1] > y):
                xc = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
                if xc > x:
                    inside = not inside
        return inside

    def representatives(self, point: SurfacePoint, tol: float = 1e-12) -> list[SurfacePoint]:
        """All chart copies of a point (several when it lies on an edge or vertex)."""
        c, p = point.chart_id, point.xy
        verts = self.charts[c].vertices
        n = len(verts)
        for j in range(n):
            if np.hypot(*(p - verts[j])) <= tol:
                return [
                    SurfacePoint.make(cc, self.charts[cc].vertices[jj])
                    for cc, jj in self.vertex_classes[self.vertex_class[(c, j)]]
                ]
        reps = [SurfacePoint.make(c, p)]
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            ab = b - a
            t = float(np.dot(p - a, ab) / np.dot(ab, ab))
            if -tol <= t <= 1 + tol and abs(ab[0] * (p - a)[1] - ab[1] * (p - a)[0]) / math.hypot(*ab) <= tol:
                g = self.gluings[(c, i)]
                reps.append(SurfacePoint.make(g.target_chart, p + np.array(g.shift)))
        return reps

    def canonical(self, point: SurfacePoint, tol: float = 1e-12) -> SurfacePoint:
        return min(self.representatives(point, tol), key=lambda q: (q.chart_id, q.position))

    def same_point(self, a: SurfacePoint, b: SurfacePoint, tol: float = 1e-9) -> bool:
        for ra in self.representatives(a, tol):
            for rb in self.representatives(b, tol):
                if ra.chart_id == rb.chart_id and math.dist(ra.position, rb.position) <= tol:
                    return True
        return False

    # -- straight-line flow -----------------------------------------------
    def _wedge_contains(self, chart: int, j: int, d: np.ndarray, tol: float = 1e-12) -> bool:
        c = self.charts[chart]
        v = c.vertices
        n = len(v)
        u1 = v[(j + 1) % n] - v[j]
        u2 = v[(j - 1) % n] - v[j]
        start, end = (u1, u2) if c.orientation > 0 else (u2, u1)
        a0 = math.atan2(start[1], start[0])
        span = (math.atan2(end[1], end[0]) - a0) % (2 * math.pi)
        ang = (math.atan2(d[1], d[0]) - a0) % (2 * math.pi)
        if ang > 2 * math.pi - tol:
            ang = 0.0
        return ang <= span + tol

    def _pivot(self, chart: int, j: int, d: np.ndarray, offset: np.ndarray, remaining: float):
        """Rotate counterclockwise around a regular vertex until ``d`` points into the chart."""
        if self.is_cone_vertex(chart, j):
            raise HitConePoint(remaining)
        n = self.polygon.n
        for _ in range(len(self.vertex_classes[self.vertex_class[(chart, j)]]) + 1):
            if self._wedge_contains(chart, j, d):
                return chart, self.charts[chart].vertices[j].copy(), offset
            edge = (j - 1) % n if self.charts[chart].orientation > 0 else j
            g = self.gluings[(chart, edge)]
            offset = offset - np.array(g.shift)
            chart = g.target_chart
        raise GluingNotTranslation("no chart around a regular vertex contains the direction")

    def walk(self, start: SurfacePoint, direction, distance: float) -> Iterator[Segment]:
        """Yield the chart-by-chart pieces of the straight trajectory."""
        d = np.asarray(direction, dtype=float)
        d = d / math.hypot(*d)
        if distance < 0:
            raise InputError("distance must be non-negative")
        chart, p = start.chart_id, start.xy.copy()
        offset = np.zeros(2)
        s = 0.0
        n = self.polygon.n
        for j in range(n):
            if np.hypot(*(p - self.charts[chart].vertices[j])) <= CONE_TOL:
                chart, p, offset = self._pivot(chart, j, d, offset, distance)
                break
        max_steps = 10_000_000
        for _ in range(max_steps):
            remaining = distance - s
            verts = self.charts[chart].vertices
            orient = self.charts[chart].orientation
            t_exit, edge = math.inf, -1
            for i in range(n):
                a, b = verts[i], verts[(i + 1) % n]
                e = b - a
                outward = orient * np.array([e[1], -e[0]])
                dn = float(np.dot(outward, d))
                if dn <= 1e-14 * math.hypot(*e):
                    continue
                denom = d[0] * e[1] - d[1] * e[0]
                w = a - p
                t = (w[0] * e[1] - w[1] * e[0]) / denom
                u = (w[0] * d[1] - w[1] * d[0]) / denom
                if t >= -1e-12 and -1e-9 <= u <= 1 + 1e-9 and t < t_exit:
                    t_exit, edge = max(t, 0.0), i
            if edge < 0:
                raise GluingNotTranslation(f"no exit edge from chart {chart} at {p}")
            step = min(t_exit, remaining)
            # singular vertices passed within tolerance
            for j in range(n):
                w = verts[j] - p
                along = float(np.dot(w, d))
                if -CONE_TOL <= along <= step + CONE_TOL and abs(w[0] * d[1] - w[1] * d[0]) <= CONE_TOL:
                    if self.is_cone_vertex(chart, j):
                        raise HitConePoint(distance - s - max(along, 0.0))
            if t_exit >= remaining:
                end = p + remaining * d
                yield Segment(chart, p, end, s, distance, offset.copy())
                return
            q = p + t_exit * d
            yield Segment(chart, p, q, s, s + t_exit, offset.copy())
            s += t_exit
            a, b = verts[edge], verts[(edge + 1) % n]
            at_vertex = None
            if np.hypot(*(q - a)) <= CONE_TOL:
                at_vertex = edge
            elif np.hypot(*(q - b)) <= CONE_TOL:
                at_vertex = (edge + 1) % n
            if at_vertex is not None:
                chart, p, offset = self._pivot(chart, at_vertex, d, offset, distance - s)
                continue
            g = self.gluings[(chart, edge)]
            shift = np.array(g.shift)
            p = q + shift
            offset = offset - shift
            chart = g.target_chart
        raise GluingNotTranslation("trajectory exceeded the step budget")

    def transport(self, start: SurfacePoint, direction, distance: float) -> SurfacePoint:
        last = None
        for seg in self.walk(start, direction, distance):
            last = seg
        if last is None:
            return self.canonical(start)
        return self.canonical(SurfacePoint.make(last.chart, last.end))

    def develop(self, start: SurfacePoint, direction, distance: float) -> np.ndarray:
        """Developed polyline (k, 2) of the trajectory, in the start chart's coordinates."""
        pts = [start.xy.copy()]
        for seg in self.walk(start, direction, distance):
            pts.append(seg.end + seg.offset)
        return np.array(pts)

    # -- flat-torus data ---------------------------------------------------
    def chart_offsets(self) -> np.ndarray:
        """Development offsets of every chart along a BFS spanning tree from chart 0."""
        offsets = np.full((self.n_charts, 2), np.nan)
        offsets[0] = 0.0
        queue = [0]
        while queue:
            c = queue.pop(0)
            for i in range(self.polygon.n):
                g = self.gluings[(c, i)]
                if np.isnan(offsets[g.target_chart, 0]):
                    offsets[g.target_chart] = offsets[c] - np.array(g.shift)
                    queue.append(g.target_chart)
        return offsets

    def period_lattice(self) -> np.ndarray | None:
        """Reduced basis (rows) of the period lattice when the surface is a flat torus."""
        if self.cone_points:
            return None
        offsets = self.chart_offsets()
        periods = []
        for (c, i), g in self.gluings.items():
            v = offsets[c] - offsets[g.target_chart] - np.array(g.shift)
            if np.hypot(*v) > 1e-9 * self.diameter:
                periods.append(v)
        return lattice_basis(periods)


def _gauss_reduce(b1: np.ndarray, b2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if np.dot(b1, b1) > np.dot(b2, b2):
        b1, b2 = b2, b1
    while True:
        mu = round(float(np.dot(b1, b2) / np.dot(b1, b1)))
        b2 = b2 - mu * b1
        if np.dot(b2, b2) >= np.dot(b1, b1) - 1e-12:
            return b1, b2
        b1, b2 = b2, b1


def lattice_basis(vectors: Sequence[np.ndarray], tol: float = 1e-9) -> np.ndarray:
    """Gauss-reduced basis of the planar lattice generated by ``vectors``."""
    vecs = [np.asarray(v, dtype=float) for v in vectors if np.hypot(*v) > tol]
    if not vecs:
        raise InputError("no nonzero lattice vectors")
    vecs.sort(key=lambda v: float(np.dot(v, v)))
    b1 = vecs[0]
    b2 = next((v for v in vecs[1:] if abs(b1[0] * v[1] - b1[1] * v[0]) > tol * np.hypot(*b1) * np.hypot(*v)), None)
    if b2 is None:
        raise InputError("period vectors are collinear")
    b1, b2 = _gauss_reduce(b1, b2)
    changed = True
    while changed:
        changed = False
        basis = np.array([b1, b2]).T
        for v in vecs:
            coef = np.linalg.solve(basis, v)
            frac = coef - np.round(coef)
            if np.abs(frac).max() > 1e-7:
                r = v - np.round(coef[0]) * b1 - np.round(coef[1]) * b2
                cands = sorted([b1, b2, r], key=lambda w: float(np.dot(w, w)))
                nb1 = cands[0]
                nb2 = next(w for w in cands[1:] if abs(nb1[0] * w[1] - nb1[1] * w[0]) > tol)
                b1, b2 = _gauss_reduce(nb1, nb2)
                changed = True
                break
    scale = max(np.hypot(*b1), np.hypot(*b2))
    out = np.array([b1, b2])
    out[np.abs(out) < 1e-12 * scale] = 0.0
    if out[0, 0] < 0 or (out[0, 0] == 0 and out[0, 1] < 0):
        out[0] = -out[0]
    if out[0, 0] * out[1, 1] - out[0, 1] * out[1, 0] < 0:
        out[1] = -out[1]
    return out


def unfold(poly: RationalPolygon) -> TranslationSurface:
    return TranslationSurface(poly, dihedral_group(poly))


def transport(surface: TranslationSurface, start: SurfacePoint, direction, distance: float) -> SurfacePoint:
    return surface.transport(start, direction, distance)


def develop(surface: TranslationSurface, start: SurfacePoint, direction, distance: float) -> np.ndarray:
    return surface.develop(start, direction, distance)


# -- named examples ----------------------------------------------------------
def unit_square() -> RationalPolygon:
    return build_polygon([(1, 2)] * 4, [1, 1, 1, 1])


def right_isoceles() -> RationalPolygon:
    return build_polygon([(1, 2), (1, 4), (1, 4)], [1, math.sqrt(2), 1])


def equilateral() -> RationalPolygon:
    return build_polygon([(1, 3)] * 3, [1, 1, 1])


def triangle_from_angles(angles: Sequence, base: float = 1.0) -> RationalPolygon:
    """Triangle with the given angles and edge 0 of length ``base`` (law of sines)."""
    a = [RationalAngle.coerce(x) for x in angles]
    if len(a) != 3:
        raise InputError("triangle needs three angles")
    s = [math.sin(x.radians) for x in a]
    # edge i joins vertex i to i+1 and is opposite vertex i+2
    lengths = [base * s[(i + 2) % 3] / s[2] for i in range(3)]
    return build_polygon(a, lengths)


def polygon_from_json(data: dict) -> RationalPolygon:
    return build_polygon([tuple(a) for a in data["angles"]], data["edge_lengths"])


def surface_to_json(surface: TranslationSurface) -> dict:
    return {
        "charts": [
            {"index": c.index, "orientation": c.orientation, "vertices": c.vertices.tolist()}
            for c in surface.charts
        ],
        "gluings": [
            {"chart": g.chart, "edge": g.edge, "target_chart": g.target_chart, "target_edge": g.target_edge,
             "shift": list(g.shift)}
            for g in surface.gluings.values()
        ],
        "cone_points": [
            {"chart": cp.point.chart_id, "position": list(cp.point.position), "cone_angle_over_pi": 2 * cp.multiplicity}
            for cp in surface.cone_points
        ],
        "genus": surface.genus,
        "area": surface.area,
        "group_order": len(surface.group),
    }
