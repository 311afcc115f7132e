"""Momentum densities, concentration, observable pairings and the images state.

``d mu_psi(xi) = hbar^-2 ||psi||^-2 |psi_hat(xi/hbar)|^2``.  For a Gaussian
quasimode ``psi_hat(k) = phi0_hat(k) sum_j c_j exp(-i t_j |k|^2)``, which
factors into a Gaussian around ``xi_k`` times a radial function; the
closed-form path integrates it on a polar grid.  The FFT path works from a
sampled planar field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridTooCoarse, InputError
from .polygon import DihedralGroup, SurfacePoint
from .quasimode import Quasimode, evaluate
from .wavepacket import GROUP_SPEED, GaussianPacket, Grid2D

GAUSS_CUT = 46.0  # exp(-46) ~ 1e-20
RADIAL_ORDER = 8


def spacing_limit(hbar: float) -> float:
    return math.sqrt(hbar) / 8


@dataclass
class MomentumDensity:
    """Density samples with quadrature weights (area elements in xi)."""

    xi: np.ndarray  # (M, 2)
    values: np.ndarray  # (M,)
    weights: np.ndarray  # (M,)
    hbar: float
    provenance: str  # "closed-form" or "fft"
    center: np.ndarray
    eps: float | None = None

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.values * self.weights))

    def to_rows(self) -> list[tuple[float, float, float]]:
        return [(float(a), float(b), float(v)) for (a, b), v in zip(self.xi, self.values)]

    def metadata(self) -> dict:
        return {
            "hbar": self.hbar,
            "eps": self.eps,
            "xi_k": [float(v) for v in self.center],
            "provenance": self.provenance,
            "total_mass": self.total_mass,
            "samples": int(len(self.values)),
        }


def _packet_of(state) -> tuple[GaussianPacket, Callable | None, float]:
    """Initial packet, radial time factor and planar squared norm for a state."""
    if isinstance(state, GaussianPacket):
        return state, None, state.norm2()
    if isinstance(state, Quasimode):
        if state.state != "gaussian":
            raise InputError("closed-form density needs the Gaussian initial state")
        from .spectral import l2_norm_identity

        h = state.packet.hbar
        t, c = state.nodes, state.coefficients

        def radial(rho):
            k2 = (np.asarray(rho, dtype=float) / h) ** 2
            out = np.empty(k2.shape, dtype=complex)
            flat = k2.ravel()
            step = max(1, 4_000_000 // max(1, t.size))
            for i in range(0, flat.size, step):
                out.ravel()[i : i + step] = np.exp(-1j * np.outer(flat[i : i + step], t)) @ c
            return out

        return state.packet, radial, l2_norm_identity(state, euclidean=True)
    raise InputError(f"unsupported state type {type(state).__name__}")


def density_values(state, xi) -> np.ndarray:
    """Normalized closed-form density at momenta ``xi`` (shape (..., 2))."""
    packet, radial, norm2 = _packet_of(state)
    h = packet.hbar
    xi = np.asarray(xi, dtype=float)
    xk = np.asarray(packet.xi0)
    d2 = np.sum((xi - xk) ** 2, axis=-1)
    amp2 = h / (4 * math.pi) * np.exp(-d2 / h)  # |phi0_hat(xi/hbar)|^2
    if radial is not None:
        amp2 = amp2 * np.abs(radial(np.hypot(xi[..., 0], xi[..., 1]))) ** 2
    return amp2 / (h**2 * norm2)


def _radial_nodes(lo: float, hi: float, width: float):
    panels = max(1, int(math.ceil((hi - lo) / width)))
    z, w = np.polynomial.legendre.leggauss(RADIAL_ORDER)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return (mid[:, None] + half[:, None] * z).ravel(), (half[:, None] * w).ravel()


def momentum_density(state, eps: float = 0.1, spacing: float | None = None) -> MomentumDensity:
    """Closed-form density on a polar grid over the annulus around ``|xi| = 1``.

    The annulus ``1 +- 10 hbar^(1/2-eps)`` is truncated further to where the
    Gaussian factor exceeds ``exp(-46)`` of its peak.
    """
    packet, radial, norm2 = _packet_of(state)
    h = packet.hbar
    ds = spacing_limit(h) if spacing is None else float(spacing)
    if ds > spacing_limit(h) * (1 + 1e-12):
        raise GridTooCoarse(f"spacing {ds:.3g} exceeds hbar^1/2/8 = {spacing_limit(h):.3g}")
    r = h ** (0.5 - eps)
    reach = math.sqrt(GAUSS_CUT * h)
    lo = max(1 - 10 * r, 1 - reach, 0.0)
    hi = min(1 + 10 * r, 1 + reach)
    width = ds
    if isinstance(state, Quasimode):
        width = min(width, h**2 / (2 * state.schedule.T))  # resolve the energy-shell factor
    rho, wr = _radial_nodes(lo, hi, width)
    rho_min = max(lo, 1e-12)
    arg = 1 - GAUSS_CUT * h / (2 * rho_min)
    dmax = math.pi if arg <= -1 else math.acos(arg)
    theta_k = math.atan2(packet.xi0[1], packet.xi0[0])
    n_th = max(16, int(math.ceil(2 * dmax * hi / ds)))
    if dmax >= math.pi:
        th = theta_k - math.pi + 2 * math.pi * np.arange(n_th) / n_th
        wt = np.full(n_th, 2 * math.pi / n_th)
    else:
        th = theta_k + np.linspace(-dmax, dmax, n_th)
        wt = np.full(n_th, 2 * dmax / (n_th - 1))
        wt[0] = wt[-1] = wt[0] / 2
    R, TH = np.meshgrid(rho, th, indexing="ij")
    xi = np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1).reshape(-1, 2)
    d2 = np.sum((xi - np.asarray(packet.xi0)) ** 2, axis=-1)
    amp2 = (h / (4 * math.pi) * np.exp(-d2 / h)).reshape(R.shape)
    if radial is not None:
        amp2 = amp2 * (np.abs(radial(rho)) ** 2)[:, None]
    values = (amp2 / (h**2 * norm2)).ravel()
    weights = (wr[:, None] * rho[:, None] * wt[None, :]).ravel()
    eps_val = eps if isinstance(state, Quasimode) or eps is not None else None
    return MomentumDensity(xi, values, weights, h, "closed-form", np.asarray(packet.xi0, dtype=float), eps_val)


def momentum_density_fft(field: np.ndarray, grid: Grid2D, hbar: float, norm2: float | None = None, center=None) -> MomentumDensity:
    """Density from a sampled planar field via the FFT (``field[iy, ix]``)."""
    ny, nx = field.shape
    dx, dy = grid.spacing
    dk = (2 * math.pi / (nx * dx), 2 * math.pi / (ny * dy))
    if hbar * max(dk) > spacing_limit(hbar) * (1 + 1e-12):
        raise GridTooCoarse(f"momentum spacing {hbar * max(dk):.3g} exceeds hbar^1/2/8 = {spacing_limit(hbar):.3g}")
    KX, KY = grid.wavenumbers()
    fhat = np.fft.fft2(field) * (dx * dy / (2 * math.pi)) * np.exp(-1j * (KX * grid.origin[0] + KY * grid.origin[1]))
    if norm2 is None:
        norm2 = float(np.sum(np.abs(field) ** 2) * dx * dy)
    vals = np.abs(fhat) ** 2 / (hbar**2 * norm2)
    xi = np.stack([hbar * KX, hbar * KY], axis=-1).reshape(-1, 2)
    w = np.full(xi.shape[0], hbar**2 * dk[0] * dk[1])
    if center is None:
        center = xi[np.argmax(vals.ravel())]
    return MomentumDensity(xi, vals.ravel(), w, float(hbar), "fft", np.asarray(center, dtype=float))


def concentration(density: MomentumDensity, center, radius: float) -> float:
    """Fraction of the density's mass inside ``B(center, radius)``."""
    if radius <= 0:
        raise InputError("radius must be positive")
    inside = np.hypot(*(density.xi - np.asarray(center, dtype=float)).T) < radius
    total = density.total_mass
    return float(np.clip(np.sum(density.values[inside] * density.weights[inside]) / total, 0.0, 1.0))


# -- observables ------------------------------------------------------------------
@dataclass(frozen=True)
class Observable:
    """Momentum-only symbol ``a(xi)`` with a Lipschitz constant and sup bound."""

    symbol: Callable = field(compare=False)
    lipschitz: float
    bound: float
    name: str = "a"

    def __call__(self, xi) -> np.ndarray:
        return self.symbol(np.asarray(xi, dtype=float))


def lipschitz_estimate(symbol: Callable, radius: float = 2.0, n: int = 201) -> tuple[float, float]:
    """Finite-difference gradient maximum and sup of ``|a|`` on the disc of ``radius``."""
    g = np.linspace(-radius, radius, n)
    X, Y = np.meshgrid(g, g)
    pts = np.stack([X, Y], axis=-1)
    vals = symbol(pts)
    step = g[1] - g[0]
    gy, gx = np.gradient(vals, step)
    inside = X**2 + Y**2 <= radius**2
    return float(np.max(np.hypot(gx, gy)[inside])), float(np.max(np.abs(vals[inside])))


def make_observable(symbol: Callable, name: str = "a", radius: float = 2.0) -> Observable:
    lip, sup = lipschitz_estimate(symbol, radius)
    return Observable(symbol, lip, sup, name)


def linear_observable(v) -> Observable:
    v = np.asarray(v, dtype=float)
    return Observable(lambda xi: xi @ v, float(np.hypot(*v)), 2.0 * float(np.hypot(*v)), "linear")


def pair(density: MomentumDensity, a: Callable) -> float:
    """``int a dmu / int dmu`` by the density's quadrature."""
    vals = np.asarray(a(density.xi), dtype=float)
    return float(np.sum(vals * density.values * density.weights) / density.total_mass)


# -- dihedral orbit -------------------------------------------------------------------
@dataclass(frozen=True)
class OrbitMeasure:
    atoms: np.ndarray  # (|D|, 2)
    weights: np.ndarray

    def pairing(self, a: Callable) -> float:
        return float(np.sum(self.weights * np.asarray(a(self.atoms), dtype=float)))

    def to_json(self) -> dict:
        return {"atoms": self.atoms.tolist(), "weights": self.weights.tolist()}


def orbit_measure(xi0, group: DihedralGroup) -> OrbitMeasure:
    xi0 = np.asarray(xi0, dtype=float)
    atoms = np.einsum("gij,j->gi", group.matrices, xi0)
    return OrbitMeasure(atoms, np.full(len(group), 1.0 / len(group)))


def orbit_pairing(xi0, group: DihedralGroup, a: Callable) -> float:
    """``(1/|D|) sum_g a(g xi0)``."""
    return orbit_measure(xi0, group).pairing(a)


def symmetrized_density(density: MomentumDensity, group: DihedralGroup) -> MomentumDensity:
    """Average of the pushforwards ``g_* mu`` over the group (momentum density of the images state up to its cross terms)."""
    mats = group.matrices
    xi = np.concatenate([density.xi @ m.T for m in mats])
    vals = np.tile(density.values, len(mats)) / len(mats)
    w = np.tile(density.weights, len(mats))
    return MomentumDensity(xi, vals, w, density.hbar, density.provenance, density.center, density.eps)


# -- method of images -------------------------------------------------------------------
def _inside_polygon(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    n = len(poly)
    for i in range(n):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % n]
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xint)
    return inside


def polygon_grid(poly: np.ndarray, n: int) -> tuple[np.ndarray, float]:
    """Cell centres of an ``n``-per-long-side grid over the polygon and the cell area."""
    lo, hi = poly.min(axis=0), poly.max(axis=0)
    d = float(np.max(hi - lo)) / n
    xs = lo[0] + (np.arange(int(math.ceil((hi[0] - lo[0]) / d))) + 0.5) * d
    ys = lo[1] + (np.arange(int(math.ceil((hi[1] - lo[1]) / d))) + 0.5) * d
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    return pts[_inside_polygon(pts, poly)], d * d


def surface_values(qm: Quasimode, chart: int, xy: np.ndarray) -> np.ndarray:
    """Quasimode values at chart coordinates ``xy`` (flat tori use the planar fast path)."""
    surface = qm.surface
    if surface.period_lattice() is not None:
        offsets = surface.chart_offsets()
        core = qm.cylinder.core_point.xy + offsets[qm.cylinder.core_point.chart_id]
        return qm.planar(xy + offsets[chart] - core, reach=surface.diameter * math.sqrt(2) * 4)
    return evaluate(qm, [SurfacePoint.make(chart, p) for p in xy])


@dataclass
class ImagesState:
    points: np.ndarray  # quadrature points on the polygon
    values: np.ndarray  # Psi^P at the points
    cell: float
    norm2: float  # ||Psi^P||^2 on the polygon
    surface_norm2: float  # sum over charts of ||Psi o g||^2 on the polygon (= ||Psi||^2 on the surface)
    cross: float  # sum over g != h of <Psi o g, Psi o h>


def _element_indices(group: DihedralGroup, elements) -> list[int]:
    if elements is None:
        return list(range(len(group)))
    return [int(g) for g in elements]


def images_quasimode(qm: Quasimode, n: int = 256, elements=None) -> ImagesState:
    """``Psi^P(x) = sum_g Psi(g x)`` on a midpoint grid over the polygon.

    ``elements`` restricts the sum to a subset of group indices (all by default).
    """
    surface = qm.surface
    P = surface.polygon.vertices
    pts, cell = polygon_grid(P, n)
    group = surface.group
    parts = []
    for gi in _element_indices(group, elements):
        m = group.matrix(gi)
        parts.append(surface_values(qm, gi, pts @ m.T))
    parts = np.array(parts)
    total = parts.sum(axis=0)
    diag = float(np.sum(np.abs(parts) ** 2) * cell)
    cross = 0.0
    for a in range(len(parts)):
        for b in range(a + 1, len(parts)):
            cross += 2 * float(np.sum((parts[a] * np.conj(parts[b])).real) * cell)
    return ImagesState(pts, total, cell, float(np.sum(np.abs(total) ** 2) * cell), diag, cross)


def images_value(qm: Quasimode, point: SurfacePoint) -> complex:
    """Symmetrized field ``sum_g Psi(g p)`` at a surface point."""
    surface = qm.surface
    total = 0j
    for gi in range(len(surface.group)):
        q = surface.act(gi, point)
        total += complex(surface_values(qm, q.chart_id, q.xy[None, :])[0])
    return total


# -- position density -------------------------------------------------------------------
@dataclass
class PositionDensity:
    s: np.ndarray
    u: np.ndarray
    values: np.ndarray  # normalized |psi|^2 on the (u, s) grid
    cell: float
    half_width: float

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.values) * self.cell)

    @property
    def outside_mass(self) -> float:
        """Mass of the planar field across the cylinder boundary ``|u| > w/2``."""
        mask = np.abs(self.u) > self.half_width
        return float(np.sum(self.values[mask, :]) * self.cell)


def position_density(qm: Quasimode, ns: int = 512, nu: int = 512, span: float = 2.0) -> PositionDensity:
    """``|psi|^2 / ||psi||^2`` of the planar field over one period of the strip, ``|u| <= span w/2``."""
    from .spectral import l2_norm_identity

    cyl = qm.cylinder
    ds = cyl.length / ns
    s = (np.arange(ns) + 0.5) * ds
    half = span * cyl.width / 2
    du = 2 * half / nu
    u = -half + (np.arange(nu) + 0.5) * du
    # packets are isotropic with momentum along the core, so each node factors in (s, u)
    h = qm.packet.hbar
    k = 1.0 / h
    t = qm.nodes
    w = h + 2j * t
    amp = qm.coefficients * math.sqrt(math.pi / h) / (2 * math.pi) * h / w * np.exp(-1j * t / h**2)
    centre = GROUP_SPEED * t * k
    Es = np.zeros((t.size, ns), dtype=complex)
    for m in (-1, 0, 1):  # the strip is periodic along the core
        sm = s + m * cyl.length
        Es += np.exp(-((sm[None, :] - centre[:, None]) ** 2) / (2 * w[:, None]) + 1j * k * sm[None, :])
    Eu = np.exp(-(u[None, :] ** 2) / (2 * w[:, None]))
    field = (Eu.T * amp) @ Es  # [iu, is]
    norm2 = l2_norm_identity(qm, euclidean=True)
    vals = np.abs(field) ** 2 / norm2
    return PositionDensity(s, u, vals, ds * du, cyl.width / 2)
