"""Gaussian coherent states on the plane and their free Schrodinger evolution.

Conventions: ``U_t = exp(i t Delta)``, so a plane wave ``exp(i k.x)`` picks up
``exp(-i t |k|^2)`` and a packet with momentum ``xi0/hbar`` moves with group
velocity ``2 xi0 / hbar``.  Fourier transforms use
``f_hat(k) = (1/2pi) int f(x) exp(-i k.x) dx``.  Inner products are linear in
the first slot: ``<f, g> = int f conj(g)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import j0

from .errors import CutoffTooTight, InputError

GROUP_SPEED = 2.0


def gamma(x, y):
    return np.exp(-(np.asarray(x) ** 2 + np.asarray(y) ** 2) / 2) / (2 * math.pi)


def gamma_hat(k) -> np.ndarray:
    """Fourier transform of ``gamma`` at planar wave vectors ``k`` (shape (..., 2))."""
    k = np.asarray(k, dtype=float)
    return np.exp(-np.sum(k**2, axis=-1) / 2) / (2 * math.pi)


@dataclass(frozen=True)
class GaussianPacket:
    """Closed-form evolved coherent state ``U_t phi_0``."""

    x0: tuple[float, float]
    xi0: tuple[float, float]
    hbar: float
    t: float = 0.0

    @property
    def k0(self) -> np.ndarray:
        return np.asarray(self.xi0) / self.hbar

    @property
    def width(self) -> complex:
        """Complex variance parameter ``hbar + 2 i t``."""
        return self.hbar + 2j * self.t

    @property
    def amplitude(self) -> complex:
        return math.sqrt(math.pi / self.hbar) / (2 * math.pi) * self.hbar / self.width

    @property
    def phase(self) -> complex:
        return np.exp(-1j * self.t / self.hbar**2)

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.x0) + GROUP_SPEED * self.t * self.k0

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        cx, cy = self.center
        k0x, k0y = self.k0
        r2 = (x - cx) ** 2 + (y - cy) ** 2
        return self.amplitude * self.phase * np.exp(-r2 / (2 * self.width) + 1j * (k0x * x + k0y * y))

    def norm2(self) -> float:
        """Closed-form squared L2 norm from the evolved parameters."""
        s = self.width
        return float(abs(self.amplitude) ** 2 * math.pi / (1.0 / s).real)

    def position_variance(self) -> float:
        """Second moment of ``|phi|^2 / ||phi||^2`` about the centre."""
        s = self.width
        return float(1.0 / (1.0 / s).real)


def coherent_state(x0, xi0, hbar: float) -> GaussianPacket:
    if hbar <= 0:
        raise InputError("hbar must be positive")
    xi = np.asarray(xi0, dtype=float)
    if abs(math.hypot(*xi) - 1) > 1e-9:
        raise InputError("momentum direction must be a unit vector")
    return GaussianPacket((float(x0[0]), float(x0[1])), (float(xi[0]), float(xi[1])), float(hbar), 0.0)


def propagate(packet: GaussianPacket, t: float) -> GaussianPacket:
    return replace(packet, t=packet.t + float(t))


def autocorrelation(packet: GaussianPacket, v, shift=(0.0, 0.0)) -> np.ndarray:
    """``<phi_0, tau_a U_v phi_0>`` for the packet's initial state.

    ``tau_a f = f(. - a)``; ``shift=0`` gives the plain autocorrelation.  ``v``
    and ``shift`` broadcast (``shift`` has a trailing axis of length 2).
    """
    h = packet.hbar
    v = np.asarray(v, dtype=float)
    a = np.asarray(shift, dtype=float)
    k0 = packet.k0
    ax, ay = a[..., 0], a[..., 1]
    bx = 2 * v * k0[0] + ax
    by = 2 * v * k0[1] + ay
    denom = h - 1j * v
    return (h / 4) / denom * np.exp(1j * v / h**2 + 1j * (k0[0] * ax + k0[1] * ay) - (bx**2 + by**2) / (4 * denom))


def autocorrelation_detuned(packet: GaussianPacket, v, lam: float, shift=(0.0, 0.0)) -> np.ndarray:
    """``exp(-i lam v) <phi_0, tau_a U_v phi_0>`` with the fast phase removed analytically."""
    h = packet.hbar
    v = np.asarray(v, dtype=float)
    a = np.asarray(shift, dtype=float)
    k0 = packet.k0
    ax, ay = a[..., 0], a[..., 1]
    bx = 2 * v * k0[0] + ax
    by = 2 * v * k0[1] + ay
    denom = h - 1j * v
    return (h / 4) / denom * np.exp(
        1j * v * (1 / h**2 - lam) + 1j * (k0[0] * ax + k0[1] * ay) - (bx**2 + by**2) / (4 * denom)
    )


# -- smooth cutoff ---------------------------------------------------------
def _smooth_zero(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


@dataclass(frozen=True)
class BumpCutoff:
    """Smooth radial profile equal to 1 on [0, 1/2] and 0 on [1, inf)."""

    inner: float = 0.5
    outer: float = 1.0

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        u = (s - self.inner) / (self.outer - self.inner)
        a, b = _smooth_zero(1 - u), _smooth_zero(u)
        with np.errstate(invalid="ignore"):
            out = a / (a + b)
        out = np.where(u <= 0, 1.0, out)
        return np.where(u >= 1, 0.0, out)


CHI = BumpCutoff()


@dataclass(frozen=True)
class CutoffState:
    packet: GaussianPacket
    eps: float
    radius: float

    def __call__(self, x, y) -> np.ndarray:
        x0, y0 = self.packet.x0
        s = np.hypot(np.asarray(x) - x0, np.asarray(y) - y0) / self.radius
        return CHI(s) * self.packet(x, y)

    def _radial_nodes(self, n: int = 400):
        """Gauss-Legendre nodes on [0, radius] for radial integrals."""
        z, w = np.polynomial.legendre.leggauss(n)
        s = 0.5 * self.radius * (z + 1)
        return s, 0.5 * self.radius * w

    def radial_profile(self, s) -> np.ndarray:
        h = self.packet.hbar
        return math.sqrt(math.pi / h) / (2 * math.pi) * CHI(np.asarray(s) / self.radius) * np.exp(-np.asarray(s) ** 2 / (2 * h))

    def norm2(self) -> float:
        s, w = self._radial_nodes()
        return float(np.sum(w * 2 * math.pi * s * self.radial_profile(s) ** 2))

    def tail_mass(self) -> float:
        """``||psi_0 - phi_0||^2`` by radial quadrature."""
        h = self.packet.hbar
        amp2 = math.pi / h / (4 * math.pi**2)
        r = self.radius
        # (1 - chi)^2 is supported on [r/2, inf); split at r
        z, w = np.polynomial.legendre.leggauss(200)
        s1 = r / 2 + (r / 2) * 0.5 * (z + 1)
        w1 = (r / 2) * 0.5 * w
        inner = np.sum(w1 * 2 * math.pi * s1 * amp2 * (1 - CHI(s1 / r)) ** 2 * np.exp(-(s1**2) / h))
        outer = amp2 * math.pi * h * math.exp(-(r**2) / h)  # exact Gaussian tail beyond r
        return float(inner + outer)

    def tail_bound(self) -> float:
        return math.exp(-self.packet.hbar ** (-2 * self.eps) / 8)

    def fourier_radial(self, rho, n: int = 400) -> np.ndarray:
        """Hankel transform: ``psi_hat(k0 + q)`` up to a phase, as a function of ``|q|``."""
        s, w = self._radial_nodes(n)
        rho = np.asarray(rho, dtype=float)
        return (j0(np.multiply.outer(rho, s)) * (w * s * self.radial_profile(s))).sum(axis=-1)

    def autocorrelation(self, v, n_rho: int = 4000) -> np.ndarray:
        """``<psi_0, U_v psi_0>`` by the radial (Hankel) representation."""
        h = self.packet.hbar
        rho_max = 14.0 / math.sqrt(h)
        z, w = np.polynomial.legendre.leggauss(n_rho)
        rho = 0.5 * rho_max * (z + 1)
        wr = 0.5 * rho_max * w
        dens = rho * self.fourier_radial(rho) ** 2 * wr
        v = np.atleast_1d(np.asarray(v, dtype=float))
        out = np.empty(v.shape, dtype=complex)
        for i, vi in enumerate(v.ravel()):
            out.ravel()[i] = 2 * math.pi * np.sum(dens * np.exp(1j * vi * (rho**2 + 1 / h**2)) * j0(2 * vi * rho / h))
        return out


def cutoff_state(packet: GaussianPacket, eps: float) -> CutoffState:
    if not 0 < eps < 0.5:
        raise InputError("eps must lie in (0, 1/2)")
    r = packet.hbar ** (0.5 - eps)
    if r <= 10 * math.sqrt(packet.hbar):
        raise CutoffTooTight(
            f"cutoff radius {r:.4g} <= 10 hbar^1/2 = {10 * math.sqrt(packet.hbar):.4g}; needs hbar < 10^(-1/eps)"
        )
    return CutoffState(packet, float(eps), float(r))


def localization_tail(hbar: float, eps: float) -> float:
    """Fraction of ``|phi_0|^2`` outside ``B(x0, hbar^(1/2-eps))`` (exact)."""
    return math.exp(-hbar ** (-2 * eps))


# -- FFT oracle ----------------------------------------------------------------
@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid; arrays are indexed ``[iy, ix]``."""

    origin: tuple[float, float]
    spacing: tuple[float, float]
    shape: tuple[int, int]  # (ny, nx)

    @property
    def x(self) -> np.ndarray:
        return self.origin[0] + self.spacing[0] * np.arange(self.shape[1])

    @property
    def y(self) -> np.ndarray:
        return self.origin[1] + self.spacing[1] * np.arange(self.shape[0])

    def mesh(self):
        return np.meshgrid(self.x, self.y)

    @property
    def cell(self) -> float:
        return self.spacing[0] * self.spacing[1]

    def wavenumbers(self):
        kx = 2 * math.pi * np.fft.fftfreq(self.shape[1], self.spacing[0])
        ky = 2 * math.pi * np.fft.fftfreq(self.shape[0], self.spacing[1])
        return np.meshgrid(kx, ky)

    @classmethod
    def centered(cls, center, half_width: float, n: int) -> "Grid2D":
        d = 2 * half_width / n
        return cls((center[0] - half_width, center[1] - half_width), (d, d), (n, n))


def sample(state, grid: Grid2D) -> np.ndarray:
    X, Y = grid.mesh()
    return state(X, Y)


def fft_propagate(field: np.ndarray, grid: Grid2D, t: float) -> np.ndarray:
    """Free evolution on a periodic grid: exact multiplier ``exp(-i t |k|^2)``."""
    KX, KY = grid.wavenumbers()
    return np.fft.ifft2(np.fft.fft2(field) * np.exp(-1j * t * (KX**2 + KY**2)))


def fft_oracle_grid(packet: GaussianPacket, t: float, n: int = 2048, widths: float = 8.0) -> Grid2D:
    """Square grid holding the packet at times 0 and ``t`` with ``widths`` spread margins."""
    later = propagate(packet, t)
    c0, c1 = np.asarray(packet.x0), later.center
    spread = math.sqrt(later.position_variance())
    half = 0.5 * float(np.max(np.abs(c1 - c0))) + widths * max(spread, math.sqrt(packet.hbar))
    return Grid2D.centered(0.5 * (c0 + c1), half, n)


def grid_norm2(field: np.ndarray, grid: Grid2D) -> float:
    return float(np.sum(np.abs(field) ** 2) * grid.cell)
