"""Periodic directions, metric cylinders and the length spectrum.

Cylinder widths and strip coordinates come from tracing bundles of parallel
rays (beams) sideways from the core geodesic through a triangulation of the
charts; saddle connections come from tracing angular wedges out of cone
points.  Flat tori are handled exactly through their period lattice.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BoundExceeded,
    CapExceeded,
    ConePointSeed,
    HitConePoint,
    InputError,
    NotPeriodic,
    SearchExhausted,
)
from .polygon import SurfacePoint, TranslationSurface
from .wavepacket import GROUP_SPEED

BISECTION_STEPS = 40
DEFAULT_CAP_DIAMETERS = 1e3


def _cross(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / math.hypot(*v)


def ear_clip(vertices: np.ndarray) -> list[tuple[int, int, int]]:
    """Triangulate a simple counterclockwise polygon; triangles are ccw index triples."""
    idx = list(range(len(vertices)))
    tris = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10 * len(vertices) ** 2:
            raise InputError("ear clipping failed")
        m = len(idx)
        for k in range(m):
            i0, i1, i2 = idx[(k - 1) % m], idx[k], idx[(k + 1) % m]
            a, b, c = vertices[i0], vertices[i1], vertices[i2]
            if _cross(b - a, c - b) <= 1e-14:
                continue
            ok = True
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                p = vertices[j]
                if _cross(b - a, p - a) >= -1e-14 and _cross(c - b, p - b) >= -1e-14 and _cross(a - c, p - c) >= -1e-14:
                    ok = False
                    break
            if ok:
                tris.append((i0, i1, i2))
                idx.pop(k)
                break
    tris.append(tuple(idx))
    return tris


class Triangulation:
    """Triangles of every chart with adjacency across diagonals and glued edges."""

    def __init__(self, surface: TranslationSurface):
        self.surface = surface
        P = surface.polygon.vertices
        n = surface.polygon.n
        self.tris = ear_clip(P)
        self.edge_owner: dict[int, tuple[int, int]] = {}  # polygon edge -> (triangle, slot)
        diag: dict[frozenset, list[tuple[int, int]]] = {}
        for t, tri in enumerate(self.tris):
            for slot in range(3):
                p, q = tri[slot], tri[(slot + 1) % 3]
                if (q - p) % n == 1:
                    self.edge_owner[p] = (t, slot)
                elif (p - q) % n == 1:
                    self.edge_owner[q] = (t, slot)
                else:
                    diag.setdefault(frozenset((p, q)), []).append((t, slot))
        # neighbour[(t, slot)] = (kind, data)
        self.neighbour: dict[tuple[int, int], tuple] = {}
        for pairs in diag.values():
            (t1, s1), (t2, s2) = pairs
            self.neighbour[(t1, s1)] = ("diag", t2)
            self.neighbour[(t2, s2)] = ("diag", t1)
        for edge, (t, slot) in self.edge_owner.items():
            self.neighbour[(t, slot)] = ("edge", edge)

    def coords(self, chart: int, t: int) -> np.ndarray:
        return self.surface.charts[chart].vertices[list(self.tris[t])]

    def cross_edge(self, chart: int, t: int, slot: int) -> tuple[int, int, np.ndarray, int]:
        """Chart, triangle, shift and entry side reached by crossing side ``slot`` of ``t``."""
        kind, data = self.neighbour[(t, slot)]
        if kind == "diag":
            tr = self.tris[t]
            return chart, data, np.zeros(2), _slot(self.tris[data], tr[slot], tr[(slot + 1) % 3])
        g = self.surface.gluings[(chart, data)]
        t2, s2 = self.edge_owner[data]
        return g.target_chart, t2, np.array(g.shift), s2

    def is_cone(self, chart: int, t: int, k: int) -> bool:
        return self.surface.is_cone_vertex(chart, self.tris[t][k])

    def contains(self, chart: int, t: int, p, tol: float = 1e-12) -> bool:
        a, b, c = self.coords(chart, t)
        s = np.sign(_cross(b - a, c - a))
        return (
            s * _cross(b - a, p - a) >= -tol and s * _cross(c - b, p - b) >= -tol and s * _cross(a - c, p - c) >= -tol
        )

    def segment_clip(self, chart: int, t: int, a, b) -> tuple[float, float] | None:
        """Parameter interval of segment a->b inside triangle (or None)."""
        verts = self.coords(chart, t)
        s = np.sign(_cross(verts[1] - verts[0], verts[2] - verts[0]))
        lo, hi = 0.0, 1.0
        d = b - a
        for k in range(3):
            p, q = verts[k], verts[(k + 1) % 3]
            e = q - p
            # inside: s * cross(e, x - p) >= 0
            f0 = s * _cross(e, a - p)
            f1 = s * _cross(e, d)
            if abs(f1) < 1e-15:
                if f0 < -1e-12:
                    return None
                continue
            tt = -f0 / f1
            if f1 > 0:
                lo = max(lo, tt)
            else:
                hi = min(hi, tt)
        if hi - lo <= 1e-12:
            return None
        return lo, hi


@dataclass
class StripPiece:
    chart: int
    tri: int
    lo: float
    hi: float
    offset: np.ndarray
    side: int  # +1 above the core, -1 below


@dataclass
class Cylinder:
    """Embedded metric cylinder of parallel closed geodesics."""

    direction: np.ndarray
    length: float
    width: float
    core_point: SurfacePoint
    surface: TranslationSurface = field(repr=False, compare=False)
    pieces: list[StripPiece] = field(default_factory=list, repr=False, compare=False)
    label: str = ""

    @property
    def normal(self) -> np.ndarray:
        return np.array([-self.direction[1], self.direction[0]])

    @property
    def transversal(self) -> tuple[float, float]:
        return (-self.width / 2, self.width / 2)

    @property
    def angle(self) -> float:
        return math.atan2(self.direction[1], self.direction[0])

    def locate(self, point: SurfacePoint, tol: float = 1e-11):
        """Strip coordinates ``(s, u)`` with ``s`` in [0, L) along the core and
        ``u`` in [-w/2, w/2] across it, or ``None`` outside the cylinder."""
        tri = _triangulation(self.surface)
        core = self.core_point.xy
        half = self.width / 2
        reps = self.surface.representatives(point)
        for piece in self.pieces:
            for rep in reps:
                if piece.chart != rep.chart_id:
                    continue
                p = rep.xy
                if not tri.contains(piece.chart, piece.tri, p, tol):
                    continue
                q = p + piece.offset - core
                s = float(np.dot(q, self.direction))
                u = float(np.dot(q, self.normal))
                if piece.lo - tol <= s <= piece.hi + tol and -half - tol <= u <= half + tol and u * piece.side >= -tol:
                    return s % self.length, u
        return None

    def developed(self, point: SurfacePoint):
        """Planar position of a surface point in the cylinder's development, core at the origin."""
        loc = self.locate(point)
        if loc is None:
            return None
        s, u = loc
        return s * self.direction + u * self.normal


_TRI_CACHE: dict[int, Triangulation] = {}


def _triangulation(surface: TranslationSurface) -> Triangulation:
    key = id(surface)
    tri = _TRI_CACHE.get(key)
    if tri is None or tri.surface is not surface:
        tri = Triangulation(surface)
        _TRI_CACHE[key] = tri
    return tri


def first_return(surface: TranslationSurface, seed: SurfacePoint, direction, cap: float, tol: float = 1e-9) -> float:
    """Distance after which the straight trajectory from ``seed`` first returns to it."""
    d = _unit(direction)
    reps: dict[int, list[np.ndarray]] = {}
    for r in surface.representatives(seed):
        reps.setdefault(r.chart_id, []).append(r.xy)
    try:
        for seg in surface.walk(seed, d, cap):
            for p in reps.get(seg.chart, ()):
                w = p - seg.start
                along = float(np.dot(w, d))
                if seg.s0 + along <= 1e-9 or along < -tol or along > (seg.s1 - seg.s0) + tol:
                    continue
                if abs(_cross(d, w)) <= tol * max(1.0, surface.diameter):
                    return seg.s0 + along
    except HitConePoint as exc:
        raise ConePointSeed(f"trajectory from the seed hits a cone point ({exc})") from exc
    raise NotPeriodic(f"no return to the seed within length {cap:g}")


def _trace_beams(surface: TranslationSurface, core: SurfacePoint, d: np.ndarray, length: float, side: int, limit: float):
    """Sweep parallel rays from the core sideways; return (first cone height, pieces)."""
    tri = _triangulation(surface)
    e2 = side * np.array([-d[1], d[0]])
    origin = core.xy
    tol = 1e-12 * max(1.0, surface.diameter)
    best = limit
    pieces: list[StripPiece] = []
    stack = []
    for seg in surface.walk(core, d, length):
        for t in range(len(tri.tris)):
            clip = tri.segment_clip(seg.chart, t, seg.start, seg.end)
            if clip is None:
                continue
            a = seg.start + clip[0] * (seg.end - seg.start)
            b = seg.start + clip[1] * (seg.end - seg.start)
            xa = float(np.dot(a + seg.offset - origin, d))
            xb = float(np.dot(b + seg.offset - origin, d))
            ys = (tri.coords(seg.chart, t) + seg.offset - origin) @ e2
            lo, hi = min(xa, xb), max(xa, xb)
            if ys.max() > tol:
                stack.append((seg.chart, t, lo, hi, seg.offset.copy(), 0.0))
                continue
            # the core runs along a side of this triangle: start on the far side
            for k in range(3):
                if abs(ys[k]) <= tol and abs(ys[(k + 1) % 3]) <= tol:
                    c2, t2, shift, _ = tri.cross_edge(seg.chart, t, k)
                    stack.append((c2, t2, lo, hi, seg.offset - shift, 0.0))
    steps = 0
    while stack:
        steps += 1
        if steps > 2_000_000:
            raise CapExceeded("beam tracing exceeded its budget")
        chart, t, lo, hi, offset, floor = stack.pop()
        if floor >= best - tol:
            continue
        pieces.append(StripPiece(chart, t, lo, hi, offset, side))
        verts = tri.coords(chart, t) + offset - origin
        xs = verts @ d
        ys = verts @ e2
        for k in range(3):
            if lo - tol <= xs[k] <= hi + tol and ys[k] > tol and tri.is_cone(chart, t, k):
                best = min(best, float(ys[k]))
        # upper chain: sides whose outward normal points up (+e2)
        orient = np.sign(_cross(verts[1] - verts[0], verts[2] - verts[0]))
        for k in range(3):
            k2 = (k + 1) % 3
            ex, ey = xs[k2] - xs[k], ys[k2] - ys[k]
            e = verts[k2] - verts[k]
            ny = float(np.dot(orient * np.array([e[1], -e[0]]), e2))
            if ny <= 1e-15 * math.hypot(*e):
                continue
            x_lo, x_hi = sorted((xs[k], xs[k2]))
            a, b = max(lo, x_lo), min(hi, x_hi)
            if b - a <= tol:
                continue

            def height(x):
                if abs(ex) < 1e-300:
                    return min(ys[k], ys[k2])
                return ys[k] + (x - xs[k]) * ey / ex

            new_floor = min(height(a), height(b))
            if new_floor >= best - tol:
                continue
            c2, t2, shift, _ = tri.cross_edge(chart, t, k)
            stack.append((c2, t2, a, b, offset - shift, max(new_floor, floor)))
    return best, pieces


def _finish_cylinder(surface, seed: SurfacePoint, d: np.ndarray, L: float, label: str = "") -> Cylinder:
    if not surface.cone_points:
        w = surface.area / L
        _, up = _trace_beams(surface, seed, d, L, +1, w / 2)
        _, down = _trace_beams(surface, seed, d, L, -1, w / 2)
        return Cylinder(d, L, w, surface.canonical(seed), surface, up + down, label)
    limit = surface.area / L
    u_up, _ = _trace_beams(surface, seed, d, L, +1, limit)
    u_down, _ = _trace_beams(surface, seed, d, L, -1, limit)
    w = u_up + u_down
    shift = 0.5 * (u_up - u_down)
    normal = np.array([-d[1], d[0]])
    core = seed
    if abs(shift) > 1e-14:
        core = surface.transport(seed, normal if shift > 0 else -normal, abs(shift))
        L = first_return(surface, core, d, 1.5 * L)
    _, up = _trace_beams(surface, core, d, L, +1, w / 2)
    _, down = _trace_beams(surface, core, d, L, -1, w / 2)
    return Cylinder(d, L, w, surface.canonical(core), surface, up + down, label)


def default_seed(surface: TranslationSurface) -> SurfacePoint:
    v = surface.charts[0].vertices
    tri = _triangulation(surface)
    a, b, c = tri.coords(0, 0)
    # off-centre point avoids symmetric saddle connections through the centroid
    p = 0.31 * a + 0.37 * b + 0.32 * c
    return SurfacePoint.make(0, p if len(v) else (0.0, 0.0))


def detect_cylinder(
    surface: TranslationSurface,
    direction,
    seed: SurfacePoint | None = None,
    cap: float | None = None,
    label: str = "",
) -> Cylinder:
    """Cylinder in ``direction`` containing the seed's trajectory.

    Raises ``NotPeriodic`` when no return happens within ``cap`` (default
    ``1e3`` chart diameters) and ``ConePointSeed`` when the seed's ray is singular.
    """
    d = _unit(direction)
    seed = seed or default_seed(surface)
    cap = cap if cap is not None else DEFAULT_CAP_DIAMETERS * surface.diameter
    L = first_return(surface, seed, d, cap)
    return _finish_cylinder(surface, seed, d, L, label)


# -- length spectrum ---------------------------------------------------------
@dataclass(frozen=True)
class SpectrumEntry:
    length: float
    angle: float
    width: float
    label: str
    seed: SurfacePoint | None = None

    @property
    def direction(self) -> np.ndarray:
        return np.array([math.cos(self.angle), math.sin(self.angle)])


@dataclass
class LengthSpectrum:
    bound: float
    entries: list[SpectrumEntry]

    @property
    def lengths(self) -> list[float]:
        return [e.length for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def _direction_key(angle: float) -> float:
    """Unoriented direction angle in [0, pi)."""
    a = angle % math.pi
    return 0.0 if a > math.pi - 1e-12 else a


def _torus_spectrum(surface: TranslationSurface, L_max: float, budget: int) -> LengthSpectrum:
    basis = surface.period_lattice()
    inv = np.linalg.inv(basis.T)
    cmax = np.abs(inv).sum(axis=1) * L_max
    mmax, nmax = int(math.ceil(cmax[0])) + 1, int(math.ceil(cmax[1])) + 1
    est = (2 * mmax + 1) * (nmax + 1)
    if est > budget:
        raise CapExceeded(f"torus enumeration would scan {est} lattice points (budget {budget})")
    m, n = np.meshgrid(np.arange(-mmax, mmax + 1), np.arange(0, nmax + 1))
    m, n = m.ravel(), n.ravel()
    keep = (np.gcd(m, n) == 1) & ((n > 0) | (m > 0))
    m, n = m[keep], n[keep]
    vec = np.outer(m, basis[0]) + np.outer(n, basis[1])
    lengths = np.hypot(vec[:, 0], vec[:, 1])
    ok = lengths <= L_max * (1 + 1e-12)
    entries = []
    for (vx, vy), L, mm, nn in zip(vec[ok], lengths[ok], m[ok], n[ok]):
        ang = _direction_key(math.atan2(vy, vx))
        entries.append(SpectrumEntry(float(L), ang, surface.area / float(L), f"({mm},{nn})"))
    entries.sort(key=lambda e: (round(e.length, 9), e.angle))
    return LengthSpectrum(float(L_max), entries)


@dataclass(frozen=True)
class SaddleConnection:
    start: tuple[int, int]  # (chart, polygon vertex)
    vector: tuple[float, float]
    sector: tuple[int, int]  # (chart, triangle) of the first sector

    @property
    def length(self) -> float:
        return math.hypot(*self.vector)


def saddle_connections(surface: TranslationSurface, L_max: float, budget: int = 100_000) -> list[SaddleConnection]:
    """Saddle connections of length <= L_max by wedge tracing from every cone point.

    Wedges are open; rays through regular vertices are followed separately
    with the straight-line flow, which passes marked points transparently.
    """
    tri = _triangulation(surface)
    found: dict[tuple, SaddleConnection] = {}
    tol = 1e-12 * max(1.0, surface.diameter)
    steps = 0

    def record(sector, origin_key, vec):
        key = (sector, round(vec[0], 9), round(vec[1], 9))
        if key not in found:
            found[key] = SaddleConnection(origin_key, (float(vec[0]), float(vec[1])), sector)
            if len(found) > budget:
                raise CapExceeded(f"more than {budget} saddle connections")

    def ray(sector, origin_key, origin, vec):
        d = _unit(vec)
        delta = 1e-7 * _inradius(tri.coords(*sector))
        start = SurfacePoint.make(sector[0], origin + delta * d)
        try:
            for _ in surface.walk(start, d, L_max - delta):
                pass
        except HitConePoint as exc:
            length = L_max - exc.distance_remaining
            record(sector, origin_key, length * d)

    for cls, members in enumerate(surface.vertex_classes):
        if surface.vertex_multiplicity[cls] < 2:
            continue
        for chart, j in members:
            origin = surface.charts[chart].vertices[j]
            for t, tr in enumerate(tri.tris):
                if j not in tr:
                    continue
                sector = (chart, t)
                entry = (tr.index(j) + 1) % 3  # side opposite the cone corner
                verts = tri.coords(chart, t) - origin
                P, Q = entry, (entry + 1) % 3
                if _cross(verts[P], verts[Q]) < 0:
                    P, Q = Q, P
                for V in (P, Q):
                    if math.hypot(*verts[V]) <= L_max * (1 + 1e-12):
                        if tri.is_cone(chart, t, V):
                            record(sector, (chart, j), verts[V])
                        else:
                            ray(sector, (chart, j), origin, verts[V])
                stack = []
                if _seg_dist(verts[P], verts[Q]) <= L_max:
                    c3, t3, sh, e3 = tri.cross_edge(chart, t, entry)
                    stack.append((c3, t3, -origin - sh, e3, verts[P], verts[Q]))
                while stack:
                    steps += 1
                    if steps > 50 * budget:
                        raise CapExceeded("saddle connection search exceeded its budget")
                    cc, tt, off, entry, r1, r2 = stack.pop()
                    verts = tri.coords(cc, tt) + off
                    P, Q = entry, (entry + 1) % 3
                    if _cross(verts[P], verts[Q]) < 0:
                        P, Q = Q, P
                    opp = (entry + 2) % 3
                    C = verts[opp]
                    lc = math.hypot(*C)
                    c1 = _cross(r1, C)
                    c2 = _cross(C, r2)
                    if c1 > tol * max(1.0, lc) and c2 > tol * max(1.0, lc):
                        if lc <= L_max * (1 + 1e-12):
                            if tri.is_cone(cc, tt, opp):
                                record(sector, (chart, j), C)
                            else:
                                ray(sector, (chart, j), origin, C)
                        parts = ((P, opp, r1, C), (opp, Q, C, r2))
                    elif c1 <= tol * max(1.0, lc):
                        parts = ((opp, Q, r1, r2),)
                    else:
                        parts = ((P, opp, r1, r2),)
                    for a_, b_, w1, w2 in parts:
                        if _seg_dist(verts[a_], verts[b_]) > L_max:
                            continue
                        s_ = _slot(tri.tris[tt], tri.tris[tt][a_], tri.tris[tt][b_])
                        c3, t3, sh, e3 = tri.cross_edge(cc, tt, s_)
                        stack.append((c3, t3, off - sh, e3, w1, w2))
    return sorted(found.values(), key=lambda s: (round(s.length, 9), math.atan2(s.vector[1], s.vector[0])))


def _vertex_index(surface: TranslationSurface, point: SurfacePoint) -> int:
    v = surface.charts[point.chart_id].vertices
    return int(np.argmin(np.hypot(*(v - point.xy).T)))


def _slot(tr, p, q) -> int:
    for s in range(3):
        if {tr[s], tr[(s + 1) % 3]} == {p, q}:
            return s
    raise ValueError("side not in triangle")


def _seg_dist(a, b) -> float:
    ab = b - a
    t = float(np.clip(-np.dot(a, ab) / max(np.dot(ab, ab), 1e-300), 0, 1))
    return float(math.hypot(*(a + t * ab)))


def periodic_directions(
    surface: TranslationSurface,
    L_max: float,
    budget: int = 2_000_000,
) -> LengthSpectrum:
    """Cylinder lengths up to ``L_max`` with one entry per cylinder."""
    if L_max <= 0:
        return LengthSpectrum(float(L_max), [])
    if not surface.cone_points:
        return _torus_spectrum(surface, L_max, budget)
    conns = saddle_connections(surface, L_max, budget=min(budget, 100_000))
    tri = _triangulation(surface)
    by_dir: dict[float, list[SaddleConnection]] = {}
    for sc in conns:
        key = round(_direction_key(math.atan2(sc.vector[1], sc.vector[0])), 10)
        by_dir.setdefault(key, []).append(sc)
    entries: list[SpectrumEntry] = []
    for key in sorted(by_dir):
        found: list[Cylinder] = []
        for sc in by_dir[key]:
            d = _unit(sc.vector)
            chart, j = sc.start
            origin = surface.charts[chart].vertices[j]
            t = sc.sector[1]
            inr = _inradius(tri.coords(chart, t))
            for side in (+1, -1):
                p = origin + 0.25 * inr * d + side * 1e-6 * inr * np.array([-d[1], d[0]])
                if not tri.contains(chart, t, p):
                    continue
                seed = SurfacePoint.make(chart, p)
                if any(c.locate(seed) is not None for c in found):
                    continue
                try:
                    cyl = detect_cylinder(surface, d, seed, cap=L_max * (1 + 1e-9) + 1e-9)
                except (NotPeriodic, ConePointSeed):
                    continue
                if cyl.length <= L_max * (1 + 1e-12) and not any(
                    abs(c.length - cyl.length) < 1e-9 and c.locate(cyl.core_point) is not None for c in found
                ):
                    found.append(cyl)
        for cyl in found:
            ang = _direction_key(cyl.angle)
            entries.append(SpectrumEntry(cyl.length, ang, cyl.width, f"theta={ang:.12f}", cyl.core_point))
    entries.sort(key=lambda e: (round(e.length, 9), e.angle))
    return LengthSpectrum(float(L_max), entries)


def _inradius(tri_verts) -> float:
    a, b, c = tri_verts
    area = abs(_cross(b - a, c - a)) / 2
    per = math.dist(a, b) + math.dist(b, c) + math.dist(c, a)
    return 2 * area / per


def count_lengths(spectrum: LengthSpectrum, T: float) -> int:
    if T > spectrum.bound * (1 + 1e-12):
        raise BoundExceeded(f"T = {T} exceeds the spectrum bound {spectrum.bound}")
    return bisect.bisect_right(spectrum.lengths, T * (1 + 1e-12))


def cylinder_for_entry(surface: TranslationSurface, entry: SpectrumEntry, toward=None) -> Cylinder:
    d = entry.direction
    if toward is not None and np.dot(d, toward) < 0:
        d = -d
    return detect_cylinder(surface, d, entry.seed, cap=entry.length * 1.5 + 1e-9, label=entry.label)


# -- approximating sequence ---------------------------------------------------
def energy_exponent(eps: float) -> float:
    return 8.0 / (1.0 - 2.0 * eps)


def energy_constant(c_T: float, eps: float) -> float:
    """Constant ``c`` for which ``lam <= c L^(8/(1-2eps))`` is the travel bound ``4T/hbar <= L``.

    The packet moves ``2T/hbar`` each way over ``|t| <= T``, so the swept
    support then fits inside one circumference.
    """
    return (2 * GROUP_SPEED * c_T) ** (-energy_exponent(eps))


@dataclass
class SequenceEntry:
    cylinder: Cylinder
    interval: tuple[float, float]  # (lower, upper], quasienergies served by this cylinder
    angle_error: float


@dataclass
class DirectionSequence:
    target: np.ndarray
    entries: list[SequenceEntry]
    c: float
    eps: float

    def entry_for(self, lam: float) -> SequenceEntry:
        for e in self.entries:
            if e.interval[0] < lam <= e.interval[1]:
                return e
        raise SearchExhausted(f"quasienergy {lam:g} lies beyond the last interval")

    def to_json(self) -> dict:
        return {
            "target": list(map(float, self.target)),
            "c": self.c,
            "eps": self.eps,
            "entries": [
                {
                    "label": e.cylinder.label,
                    "direction": list(map(float, e.cylinder.direction)),
                    "length": e.cylinder.length,
                    "width": e.cylinder.width,
                    "angle_error": e.angle_error,
                    "interval": list(e.interval),
                }
                for e in self.entries
            ],
        }


def _angle_between(a, b) -> float:
    return math.acos(max(-1.0, min(1.0, float(np.dot(a, b)))))


def approximating_sequence(
    surface: TranslationSurface,
    xi0,
    k_max: int,
    c: float,
    eps: float,
    start_bound: float | None = None,
    max_bound: float | None = None,
) -> DirectionSequence:
    """Periodic directions converging to ``xi0`` with increasing lengths.

    Greedy rule: the next cylinder is the shortest one, longer than the
    current, whose transverse drift ``L sin(angle to xi0)`` over one period
    is strictly smaller than the current one's; equal lengths go to the
    smaller angle.  Entry ``k`` serves the
    quasienergies ``(c L_{k-1}^kappa, c L_k^kappa]`` (``L_0 = 0``).
    """
    xi0 = _unit(xi0)
    if k_max < 1:
        raise InputError("k_max must be >= 1")
    if not 0 < eps < 0.5:
        raise InputError("eps must lie in (0, 1/2)")
    bound = start_bound or 2.5 * surface.diameter
    max_bound = max_bound or DEFAULT_CAP_DIAMETERS * surface.diameter
    chosen: list[tuple[SpectrumEntry, np.ndarray, float]] = []
    drift = math.inf
    last_len = 0.0
    while len(chosen) < k_max:
        spec = periodic_directions(surface, bound)
        pick = None
        for e in spec.entries:
            if e.length <= last_len * (1 + 1e-12):
                continue
            d = e.direction
            if np.dot(d, xi0) < 0:
                d = -d
            ang = _angle_between(d, xi0)
            dr = e.length * math.sin(ang)
            if pick is not None and e.length > pick[0].length * (1 + 1e-12):
                break
            if dr < drift * (1 - 1e-12) - 1e-15 and (pick is None or ang < pick[2]):
                pick = (e, d, ang)
        if pick is None:
            if bound >= max_bound:
                raise SearchExhausted(f"found {len(chosen)} of {k_max} directions below length {max_bound:g}")
            bound = min(2 * bound, max_bound)
            continue
        e, d, ang = pick
        chosen.append(pick)
        drift = e.length * math.sin(ang)
        last_len = e.length
        if ang == 0.0:
            if len(chosen) < k_max:
                raise SearchExhausted("target direction is periodic; no further improvement possible")
    kappa = energy_exponent(eps)
    entries = []
    lower = 0.0
    for e, d, ang in chosen:
        cyl = cylinder_for_entry(surface, e, toward=d)
        upper = c * cyl.length**kappa
        entries.append(SequenceEntry(cyl, (lower, upper), ang))
        lower = upper
    return DirectionSequence(xi0, entries, float(c), float(eps))


# -- containment ----------------------------------------------------------------
def containment_margins(cylinder: Cylinder, hbar: float, eps: float, v: float) -> tuple[float, float]:
    """Slack of the transverse and longitudinal containment inequalities (>= 0 means satisfied).

    Transverse: spread ``2|v| hbar^(-1/2-eps)`` plus radius ``hbar^(1/2-eps)``
    within ``w/2``.  Longitudinal: displacement ``2|v|/hbar`` within ``L/2``.
    """
    r = hbar ** (0.5 - eps)
    transverse = GROUP_SPEED * abs(v) * hbar ** (-0.5 - eps) + r
    travel = GROUP_SPEED * abs(v) / hbar
    return cylinder.width / 2 - transverse, cylinder.length / 2 - travel


def containment_check(cylinder: Cylinder, hbar: float, eps: float, v: float) -> bool:
    a, b = containment_margins(cylinder, hbar, eps, v)
    return a >= 0 and b >= 0


def max_admissible_time(cylinder: Cylinder, hbar: float, eps: float, steps: int = 200) -> float:
    """Largest |v| passing the containment check, by bisection."""
    if not containment_check(cylinder, hbar, eps, 0.0):
        return 0.0
    lo, hi = 0.0, cylinder.length * hbar
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if containment_check(cylinder, hbar, eps, mid):
            lo = mid
        else:
            hi = mid
    return lo


def spectrum_rows(spectrum: LengthSpectrum) -> list[dict]:
    return [{"label": e.label, "angle": e.angle, "length": e.length, "width": e.width} for e in spectrum.entries]
