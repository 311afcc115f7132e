"""Time-averaged coherent-state quasimodes hosted by a metric cylinder.

``Psi(G) = int G(t/T) exp(i lam t) U_t phi_0 dt`` is represented by a
composite Gauss-Legendre rule in ``t``; every node is a closed-form Gaussian
packet in the cylinder's development (core at the origin, axis along the
cylinder direction).  The defect ``(Delta + lam) Psi`` is the same object with
``G`` replaced by ``i T^-1 H'`` so the Laplacian is never applied numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cylinders import (
    Cylinder,
    containment_check,
    containment_margins,
    energy_constant,
    energy_exponent,
)
from .errors import (
    ContainmentViolated,
    CylinderTooNarrow,
    EnergyOutOfRange,
    HitConePoint,
    InputError,
    QuadratureUnderresolved,
)
from .polygon import CONE_TOL, SurfacePoint
from .wavepacket import GROUP_SPEED, GaussianPacket, coherent_state, cutoff_state

NODES_PER_PANEL = 16
NODES_PER_PHASE = 20
NODES_PER_CROSSING = 8
DEFAULT_C_T = 0.25


# -- windows -------------------------------------------------------------------
@dataclass(frozen=True)
class Window:
    """Compactly supported profile on [-1, 1] with closed-form derivative."""

    kind: str
    profile: Callable = field(repr=False, compare=False)
    derivative: Callable = field(repr=False, compare=False)
    smooth: bool = True

    def __call__(self, tau):
        return self.profile(tau)


def _bump(tau):
    tau = np.asarray(tau, dtype=float)
    out = np.zeros_like(tau)
    inside = np.abs(tau) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - tau[inside] ** 2))
    return out


def _bump_prime(tau):
    tau = np.asarray(tau, dtype=float)
    out = np.zeros_like(tau)
    inside = np.abs(tau) < 1
    t = tau[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t**2)) * (-2.0 * t / (1.0 - t**2) ** 2)
    return out


def _taper(tau):
    tau = np.asarray(tau, dtype=float)
    return np.where(np.abs(tau) < 1, 0.5 * (1 + np.cos(np.pi * tau)), 0.0)


def _taper_prime(tau):
    tau = np.asarray(tau, dtype=float)
    return np.where(np.abs(tau) < 1, -0.5 * np.pi * np.sin(np.pi * tau), 0.0)


def make_window(kind: str = "bump") -> Window:
    """``bump``: ``exp(1 - 1/(1 - tau^2))``, smooth.  ``cosine-taper``: ``(1 + cos pi tau)/2``, only C^1."""
    if kind in ("bump", "bump-default"):
        return Window("bump", _bump, _bump_prime, True)
    if kind == "cosine-taper":
        return Window("cosine-taper", _taper, _taper_prime, False)
    raise InputError(f"unknown window kind {kind!r}")


# -- schedule --------------------------------------------------------------------
@dataclass(frozen=True)
class ParameterSchedule:
    lam: float
    eps: float
    c_T: float
    cylinder: Cylinder = field(repr=False)
    c: float

    @property
    def hbar(self) -> float:
        return self.lam**-0.5

    @property
    def T(self) -> float:
        return self.c_T * self.hbar ** (0.75 + self.eps / 2)

    @property
    def radius(self) -> float:
        """Localization radius ``hbar^(1/2 - eps)`` of the initial state."""
        return self.hbar ** (0.5 - self.eps)

    @property
    def kappa(self) -> float:
        return energy_exponent(self.eps)

    @property
    def energy_cap(self) -> float:
        return self.c * self.cylinder.length**self.kappa

    def travel(self) -> float:
        """Length swept by the packet centre over ``|t| <= T``."""
        return 2 * GROUP_SPEED * self.T / self.hbar

    def transverse(self) -> float:
        return GROUP_SPEED * self.T * self.hbar ** (-0.5 - self.eps) + self.radius

    def to_json(self) -> dict:
        cyl = self.cylinder
        return {
            "lambda": self.lam,
            "hbar": self.hbar,
            "eps": self.eps,
            "c_T": self.c_T,
            "T": self.T,
            "c": self.c,
            "cylinder": {
                "label": cyl.label,
                "direction": [float(v) for v in cyl.direction],
                "length": cyl.length,
                "width": cyl.width,
                "core": {"chart": cyl.core_point.chart_id, "position": list(cyl.core_point.position)},
            },
        }


def schedule(lam: float, eps: float, c_T: float = DEFAULT_C_T, cylinder: Cylinder | None = None, c: float | None = None) -> ParameterSchedule:
    """Validated schedule ``hbar = lam^-1/2``, ``T = c_T hbar^(3/4 + eps/2)``.

    With the default ``c = (4 c_T)^-kappa`` the energy cap ``lam <= c L^kappa``
    coincides with the travel bound ``4T/hbar <= L``.
    """
    if cylinder is None:
        raise InputError("a host cylinder is required")
    if not lam > 0:
        raise InputError("lambda must be positive")
    if not 0 < eps < 0.5:
        raise InputError("eps must lie in (0, 1/2)")
    if not c_T > 0:
        raise InputError("c_T must be positive")
    c = energy_constant(c_T, eps) if c is None else float(c)
    sch = ParameterSchedule(float(lam), float(eps), float(c_T), cylinder, c)
    rtol = 1e-12
    if sch.lam > sch.energy_cap * (1 + rtol):
        raise EnergyOutOfRange(f"lambda = {lam:g} exceeds c L^kappa = {sch.energy_cap:.6g} (L = {cylinder.length:.6g})")
    if sch.travel() > cylinder.length * (1 + rtol):
        raise EnergyOutOfRange(f"travel 4T/hbar = {sch.travel():.6g} exceeds L = {cylinder.length:.6g}")
    if sch.transverse() > cylinder.width / 2 * (1 + rtol):
        raise CylinderTooNarrow(f"transverse spread {sch.transverse():.6g} exceeds w/2 = {cylinder.width / 2:.6g}")
    return sch


def self_intersection_report(sch: ParameterSchedule) -> dict:
    """Whether the swept support ``|t| <= T`` wraps onto itself around the cylinder."""
    span = sch.travel() + 2 * sch.radius
    return {"span": span, "length": sch.cylinder.length, "disjoint": bool(span <= sch.cylinder.length)}


# -- quadrature ---------------------------------------------------------------
def node_count(sch: ParameterSchedule) -> int:
    """Nodes needed for ``NODES_PER_PHASE`` per phase period and ``NODES_PER_CROSSING`` per packet crossing."""
    phase = NODES_PER_PHASE * 2 * sch.T * sch.lam / (2 * math.pi)
    crossing_time = sch.hbar**1.5 / GROUP_SPEED
    motion = NODES_PER_CROSSING * 2 * sch.T / crossing_time
    return int(math.ceil(max(phase, motion, 4 * NODES_PER_PANEL)))


def composite_gauss(a: float, b: float, n_nodes: int, per_panel: int = NODES_PER_PANEL):
    panels = max(1, int(math.ceil(n_nodes / per_panel)))
    z, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t = (mid[:, None] + half[:, None] * z[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return t, wt


# -- quasimode -------------------------------------------------------------------
@dataclass
class Quasimode:
    schedule: ParameterSchedule
    window: Window
    kind: str  # "main" or "defect"
    nodes: np.ndarray
    weights: np.ndarray  # quadrature weight times profile
    coefficients: np.ndarray  # complex node coefficients including exp(i lam t) and the defect factor
    packet: GaussianPacket  # initial packet in the development (core at the origin)
    state: str = "gaussian"
    scale: float = 1.0

    @property
    def cylinder(self) -> Cylinder:
        return self.schedule.cylinder

    @property
    def surface(self):
        return self.schedule.cylinder.surface

    def profile(self, tau) -> np.ndarray:
        """Time profile ``G`` on [-1, 1] (``T^-1 H'`` for the defect)."""
        if self.kind == "main":
            return self.window.profile(tau)
        return self.window.derivative(tau) / self.schedule.T

    @property
    def phase_factor(self) -> complex:
        return 1.0 if self.kind == "main" else 1j

    def is_zero(self) -> bool:
        return self.scale == 0 or not np.any(self.coefficients)

    # planar evaluation in the development ---------------------------------------
    def node_fields(self, x, y) -> np.ndarray:
        """Sum over nodes of the propagated packets at planar points (no images)."""
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        out = np.zeros(x.shape, dtype=complex)
        h = self.packet.hbar
        k0 = self.packet.k0
        plane = np.exp(1j * (k0[0] * x + k0[1] * y))
        chunk = max(1, 2_000_000 // max(1, x.size))
        for j0 in range(0, self.nodes.size, chunk):
            t = self.nodes[j0 : j0 + chunk]
            c = self.coefficients[j0 : j0 + chunk]
            s = h + 2j * t
            amp = math.sqrt(math.pi / h) / (2 * math.pi) * h / s * np.exp(-1j * t / h**2)
            cx = GROUP_SPEED * t * k0[0]
            cy = GROUP_SPEED * t * k0[1]
            r2 = (x[None, :] - cx[:, None]) ** 2 + (y[None, :] - cy[:, None]) ** 2
            out += ((c * amp)[:, None] * np.exp(-r2 / (2 * s[:, None]))).sum(axis=0)
        return out * plane

    def support_radius(self) -> float:
        """Planar radius around the origin outside which every node packet is below 1e-17."""
        h = self.packet.hbar
        T = self.schedule.T
        spread = math.sqrt((h**2 + 4 * T**2) / h)
        return GROUP_SPEED * T / h + 9 * spread

    def images(self, reach: float) -> np.ndarray:
        """Deck translations relevant for points within ``reach`` of the core."""
        surface = self.surface
        cyl = self.cylinder
        R = reach + self.support_radius()
        basis = surface.period_lattice()
        if basis is None:
            n = int(math.ceil(R / cyl.length)) + 1
            return np.outer(np.arange(-n, n + 1), cyl.length * cyl.direction)
        inv = np.linalg.inv(basis.T)
        cmax = np.abs(inv).sum(axis=1) * R + 1
        m, n = np.meshgrid(np.arange(-int(cmax[0]), int(cmax[0]) + 1), np.arange(-int(cmax[1]), int(cmax[1]) + 1))
        vecs = np.outer(m.ravel(), basis[0]) + np.outer(n.ravel(), basis[1])
        keep = np.hypot(vecs[:, 0], vecs[:, 1]) <= R
        return vecs[keep]

    def planar(self, pts: np.ndarray, reach: float | None = None) -> np.ndarray:
        """Field at developed points, periodized over the deck translations."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.size == 0:
            return np.zeros(0, dtype=complex)
        reach = float(np.max(np.hypot(pts[:, 0], pts[:, 1]))) if reach is None else reach
        out = np.zeros(len(pts), dtype=complex)
        for a in self.images(reach):
            q = pts - a
            near = np.hypot(q[:, 0], q[:, 1]) <= self.support_radius()
            if np.any(near):
                out[near] += self.node_fields(q[near, 0], q[near, 1])
        return out

    def to_json(self) -> dict:
        return {
            "schedule": self.schedule.to_json(),
            "window": self.window.kind,
            "kind": self.kind,
            "state": self.state,
            "nodes": [
                {"t": float(t), "coefficient": [float(c.real), float(c.imag)]}
                for t, c in zip(self.nodes, self.coefficients)
            ],
        }


def _assemble(sch: ParameterSchedule, window: Window, kind: str, G_scale: float, n_nodes: int | None, state: str) -> Quasimode:
    cyl = sch.cylinder
    required = node_count(sch)
    n = required if n_nodes is None else int(n_nodes)
    if n < required:
        raise QuadratureUnderresolved(f"{n} nodes given, {required} needed to resolve the phase and packet motion")
    T = sch.T
    t, w = composite_gauss(-T, T, n)
    prof = window.profile(t / T) if kind == "main" else window.derivative(t / T) / T
    weights = w * prof * G_scale
    phase = 1.0 if kind == "main" else 1j
    coeff = weights * np.exp(1j * sch.lam * t) * phase
    for tj in (t.min(), t.max()):
        if not containment_check(cyl, sch.hbar, sch.eps, tj):
            a, b = containment_margins(cyl, sch.hbar, sch.eps, tj)
            raise ContainmentViolated(f"node t = {tj:.4g}: transverse slack {a:.3g}, travel slack {b:.3g}")
    packet = coherent_state((0.0, 0.0), cyl.direction, sch.hbar)
    if state == "cutoff":
        cutoff_state(packet, sch.eps)  # validates the radius
    elif state != "gaussian":
        raise InputError(f"unknown initial state {state!r}")
    return Quasimode(sch, window, kind, t, weights, coeff, packet, state, float(G_scale))


def build(sch: ParameterSchedule, window: Window | str = "bump", scale: float = 1.0, n_nodes: int | None = None, state: str = "gaussian") -> Quasimode:
    """Quadrature representation of ``int scale*G(t/T) exp(i lam t) U_t phi_0 dt``.

    ``scale = 0`` gives the zero quasimode.  ``state="cutoff"`` selects the
    cut-off initial state for the norm paths (pointwise evaluation needs the
    Gaussian state).
    """
    window = make_window(window) if isinstance(window, str) else window
    return _assemble(sch, window, "main", scale, n_nodes, state)


def defect(sch: ParameterSchedule, window: Window | str = "bump", scale: float = 1.0, n_nodes: int | None = None, state: str = "gaussian") -> Quasimode:
    """``(Delta + lam) Psi = i int T^-1 H'(t/T) exp(i lam t) U_t phi_0 dt``."""
    window = make_window(window) if isinstance(window, str) else window
    return _assemble(sch, window, "defect", scale, n_nodes, state)


# -- surface evaluation ------------------------------------------------------------
def evaluate(qm: Quasimode, points: Sequence[SurfacePoint]) -> np.ndarray:
    """Field values at surface points; zero outside the host cylinder."""
    if qm.state != "gaussian":
        raise InputError("pointwise evaluation needs the Gaussian initial state")
    points = list(points)
    if not points:
        return np.zeros(0, dtype=complex)
    surface = qm.surface
    for p in points:
        for cp in surface.cone_points:
            for rep in surface.representatives(cp.point):
                if rep.chart_id == p.chart_id and math.hypot(*(rep.xy - p.xy)) <= CONE_TOL:
                    raise HitConePoint(0.0, f"evaluation point {p} is a cone point")
    dev = np.full((len(points), 2), np.nan)
    for i, p in enumerate(points):
        loc = qm.cylinder.developed(p)
        if loc is not None:
            dev[i] = loc
    out = np.zeros(len(points), dtype=complex)
    inside = ~np.isnan(dev[:, 0])
    if np.any(inside):
        out[inside] = qm.planar(dev[inside])
    return out


@dataclass(frozen=True)
class TorusGrid:
    """Cell-centred grid on a period rectangle of the development."""

    x: np.ndarray
    y: np.ndarray
    core: np.ndarray  # developed position of the cylinder core

    @property
    def cell(self) -> float:
        return float((self.x[1] - self.x[0]) * (self.y[1] - self.y[0]))


def rectangular_periods(surface) -> tuple[float, float] | None:
    basis = surface.period_lattice()
    if basis is None:
        return None
    b = np.abs(basis)
    if b[0, 1] < 1e-12 and b[1, 0] < 1e-12:
        return float(b[0, 0]), float(b[1, 1])
    if b[0, 0] < 1e-12 and b[1, 1] < 1e-12:
        return float(b[1, 0]), float(b[0, 1])
    return None


def evaluate_torus_grid(qm: Quasimode, n: int) -> tuple[TorusGrid, np.ndarray]:
    """Field on an ``n x n`` cell-centred grid over the developed period rectangle.

    Uses the per-axis separability of the Gaussian packets and of the
    rectangular period lattice.  Arrays are indexed ``[iy, ix]``.
    """
    surface = qm.surface
    periods = rectangular_periods(surface)
    if periods is None:
        raise InputError("fast grid evaluation needs a rectangular flat torus")
    Px, Py = periods
    offsets = surface.chart_offsets()
    dev_verts = np.vstack([c.vertices + offsets[c.index] for c in surface.charts])
    lo = dev_verts.min(axis=0)
    core = qm.cylinder.core_point.xy + offsets[qm.cylinder.core_point.chart_id]
    x = lo[0] + (np.arange(n) + 0.5) * Px / n
    y = lo[1] + (np.arange(n) + 0.5) * Py / n
    h = qm.packet.hbar
    k0 = qm.packet.k0
    t = qm.nodes
    s = h + 2j * t
    amp = qm.coefficients * math.sqrt(math.pi / h) / (2 * math.pi) * h / s * np.exp(-1j * t / h**2)
    reach = qm.support_radius()

    def axis_factor(coord, period, centre, k):
        # sum over images of exp(-(u - c)^2 / (2s) + i k u) with u = coord - centre + m*period
        total = np.zeros((t.size, coord.size), dtype=complex)
        m_max = int(math.ceil((reach + period) / period)) + 1
        c = GROUP_SPEED * t * k
        for m in range(-m_max, m_max + 1):
            u = coord - centre + m * period
            total += np.exp(-((u[None, :] - c[:, None]) ** 2) / (2 * s[:, None]) + 1j * k * u[None, :])
        return total

    Ex = axis_factor(x, Px, core[0], k0[0])
    Ey = axis_factor(y, Py, core[1], k0[1])
    field = (Ey.T * amp) @ Ex
    return TorusGrid(x, y, core), field
