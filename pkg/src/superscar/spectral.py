"""Norm identities, the Bessel-asymptotic norm law and spectral-width scaling.

``||Psi(G)||^2 = 1/2 int g(v) exp(-i lam v) A(v) dv`` where ``A`` is the
autocorrelation of the initial packet summed over the deck translations of
the host surface and ``g(v) = T g~(v/T)`` with
``g~(w) = int G((u+w)/2) G((u-w)/2) du``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import ive

from .errors import InsufficientSpan
from .quasimode import ParameterSchedule, Quasimode, Window, make_window
from .wavepacket import autocorrelation_detuned, cutoff_state

GL_PANELS = 96
GL_ORDER = 24


def _composite(a: float, b: float, panels: int, order: int):
    z, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return (mid[:, None] + half[:, None] * z).ravel(), (half[:, None] * w).ravel()


# -- window autocorrelation --------------------------------------------------------
@dataclass
class WindowAutocorr:
    """``g~`` for a profile ``G`` on [-1, 1]; ``g(v) = T g~(v/T)``."""

    G: Callable = field(repr=False)
    T: float
    g0: float = 0.0
    g2_bound: float = 0.0

    def tilde(self, w) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        flat = w.ravel()
        out = np.zeros(flat.shape)
        z, wt = _composite(-1.0, 1.0, GL_PANELS, GL_ORDER)
        inside = np.flatnonzero(np.abs(flat) < 2)
        chunk = 1024
        for k in range(0, inside.size, chunk):
            idx = inside[k : k + chunk]
            wi = flat[idx][:, None]
            half = 2 - np.abs(wi)  # u ranges over (|w| - 2, 2 - |w|)
            u = half * z[None, :]
            vals = self.G((u + wi) / 2) * self.G((u - wi) / 2)
            out[idx] = half[:, 0] * (vals @ wt)
        return out.reshape(w.shape)

    def __call__(self, v) -> np.ndarray:
        return self.T * self.tilde(np.asarray(v, dtype=float) / self.T)

    def tilde_second_derivative(self, w, h: float = 1e-3) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return (self.tilde(w + h) - 2 * self.tilde(w) + self.tilde(w - h)) / h**2


def window_autocorr(G: Callable, T: float, n_bound: int = 401) -> WindowAutocorr:
    if T <= 0:
        raise ValueError("T must be positive")
    wa = WindowAutocorr(G, float(T))
    wa.g0 = float(wa.tilde(0.0)[0])
    grid = np.linspace(-2, 2, n_bound)
    wa.g2_bound = float(np.max(np.abs(wa.tilde_second_derivative(grid))))
    return wa


def profile_of(qm: Quasimode) -> Callable:
    return qm.profile


# -- Bessel ----------------------------------------------------------------------
def _trapezoid_nodes(x: float) -> int:
    return int(10 * math.sqrt(x) + 64)


def bessel_J0(x: float) -> float:
    """``int_0^{2pi} exp(-x(1 - cos th)) dth`` by the periodic trapezoid rule."""
    n = _trapezoid_nodes(x)
    th = 2 * math.pi * np.arange(n) / n
    return float(2 * math.pi * np.mean(np.exp(-x * (1 - np.cos(th)))))


def bessel_J2(x: float, hbar: float) -> float:
    """``int_0^{2pi} ((1 - cos th)^2 - hbar cos(th)/2) exp(-x(1 - cos th)) dth``."""
    n = _trapezoid_nodes(x)
    th = 2 * math.pi * np.arange(n) / n
    c = np.cos(th)
    return float(2 * math.pi * np.mean(((1 - c) ** 2 - 0.5 * hbar * c) * np.exp(-x * (1 - c))))


def cos_moment(x: float, n: int) -> float:
    """``int_0^{2pi} cos(n th) exp(-x(1 - cos th)) dth`` by quadrature."""
    m = _trapezoid_nodes(x) + 4 * n
    th = 2 * math.pi * np.arange(m) / m
    return float(2 * math.pi * np.mean(np.cos(n * th) * np.exp(-x * (1 - np.cos(th)))))


@dataclass(frozen=True)
class BesselEval:
    x: float
    hbar: float
    J0: float
    J2: float
    I_scaled: tuple[float, float, float]  # exp(-x) I_n(x), n = 0, 1, 2

    def J0_from_I(self) -> float:
        return 2 * math.pi * self.I_scaled[0]

    def J2_from_I(self) -> float:
        i0, i1, i2 = self.I_scaled
        return 2 * math.pi * (1.5 * i0 - 2 * i1 + 0.5 * i2 - 0.5 * self.hbar * i1)

    def identity_error(self) -> float:
        return abs(self.J0 - self.J0_from_I()) / abs(self.J0_from_I())


def bessel(x: float, hbar: float = 0.0) -> BesselEval:
    if not x > 0:
        raise ValueError("x must be positive")
    I = tuple(float(ive(n, x)) for n in (0, 1, 2))
    return BesselEval(float(x), float(hbar), bessel_J0(x), bessel_J2(x, hbar), I)


# -- norm identity -------------------------------------------------------------------
def _images(qm: Quasimode) -> np.ndarray:
    return qm.images(0.0)


def autocorrelation_sum(qm: Quasimode, v, euclidean: bool = False) -> np.ndarray:
    """``exp(-i lam v) sum_a <phi_0, tau_a U_v phi_0>`` over the deck translations."""
    v = np.asarray(v, dtype=float)
    lam = qm.schedule.lam
    if euclidean:
        return autocorrelation_detuned(qm.packet, v, lam)
    out = np.zeros(v.shape, dtype=complex)
    for a in _images(qm):
        out += autocorrelation_detuned(qm.packet, v, lam, a)
    return out


@dataclass(frozen=True)
class NormReport:
    value: float
    imag: float
    truncation: float  # |v| cut-off actually used
    tail_bound: float


def l2_norm_identity(qm: Quasimode, euclidean: bool = False, report: bool = False, C: float = 20.0):
    """Squared norm through the autocorrelation integral.

    The integral runs over ``|v| <= min(2T, C hbar)``; the discarded part is
    bounded by the measured autocorrelation size at the cut-off.
    ``euclidean=True`` drops the deck translations (planar norm).
    """
    sch = qm.schedule
    if qm.is_zero():
        rep = NormReport(0.0, 0.0, 0.0, 0.0)
        return rep if report else 0.0
    h, T = sch.hbar, sch.T
    wa = window_autocorr(qm.profile, T, n_bound=5)
    scale = qm.scale
    cut = min(2 * T, C * h)
    if qm.state == "cutoff":
        value, imag = _cutoff_norm(qm, wa, cut)
    else:
        width = h**1.5 / 2
        if math.exp(-1 / h) > 1e-18:
            # the off-peak tail exp(-1/hbar) still oscillates at frequency 1/hbar^2
            width = min(width, 2 * math.pi * h**2)
        panels = max(8, int(math.ceil(2 * cut / width)))
        v, w = _composite(-cut, cut, panels, 16)
        integrand = wa(v) * autocorrelation_sum(qm, v, euclidean)
        total = 0.5 * np.sum(w * integrand) * scale**2
        value, imag = float(total.real), float(total.imag)
    tail = 0.0
    if cut < 2 * T:
        edge = np.abs(autocorrelation_sum(qm, np.array([-cut, cut]), euclidean)).max()
        tail = float(0.5 * edge * 2 * (2 * T - cut) * T * wa.g0 * scale**2)
    rep = NormReport(value, imag, cut, tail)
    return rep if report else value


def _cutoff_norm(qm: Quasimode, wa: WindowAutocorr, cut: float):
    cs = cutoff_state(qm.packet, qm.schedule.eps)
    h = qm.schedule.hbar
    width = h**1.5 / 2
    panels = max(8, int(math.ceil(2 * cut / width)))
    v, w = _composite(-cut, cut, panels, 16)
    A = cs.autocorrelation(v) * np.exp(-1j * qm.schedule.lam * v)
    total = 0.5 * np.sum(w * wa(v) * A) * qm.scale ** 2
    return float(total.real), float(total.imag)


# -- norm law -------------------------------------------------------------------------
@dataclass(frozen=True)
class LemmaPrediction:
    value: float
    leading_constant: float
    correction_bound: float

    @property
    def relative_correction(self) -> float:
        return self.correction_bound / self.value


def lemma_prediction(sch: ParameterSchedule, window: Window | str = "bump", kind: str = "main") -> LemmaPrediction:
    """``(1/2)(hbar T/4) g~(0) J0(2/hbar)`` with a bound on the ``J2`` Taylor correction."""
    window = make_window(window) if isinstance(window, str) else window
    h, T = sch.hbar, sch.T
    G = window.profile if kind == "main" else (lambda tau: window.derivative(tau) / T)
    wa = window_autocorr(G, T)
    b = bessel(2 / h, h)
    lead = 0.5 * (h * T / 4) * wa.g0 * b.J0
    corr = 0.5 * (h * T / 4) * 0.5 * wa.g2_bound * (h / T) ** 2 * abs(b.J2)
    return LemmaPrediction(float(lead), float(wa.g0 * math.sqrt(math.pi) / 8), float(corr))


def spectral_width(sch: ParameterSchedule, window: Window | str = "bump") -> float:
    """``||(Delta + lam) Psi|| / ||Psi||`` through the norm identity for both fields."""
    from .quasimode import build, defect

    main = l2_norm_identity(build(sch, window))
    dfc = l2_norm_identity(defect(sch, window))
    return math.sqrt(dfc / main)


# -- scaling fits --------------------------------------------------------------------
@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    slope_stderr: float
    residuals: tuple[float, ...]

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_stderr": self.slope_stderr,
            "residuals": list(self.residuals),
        }


def fit_exponent(points: Sequence[tuple[float, float]], min_points: int = 5, min_decades: float = 2.0) -> ExponentFit:
    """Least-squares slope of ``log value`` against ``log x``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < min_points:
        raise InsufficientSpan(f"need at least {min_points} points, got {len(pts)}")
    x, y = pts[:, 0], pts[:, 1]
    if np.any(x <= 0) or np.any(y <= 0):
        raise InsufficientSpan("abscissae and values must be positive")
    lx, ly = np.log10(x), np.log10(y)
    if lx.max() - lx.min() < min_decades - 1e-12:
        raise InsufficientSpan(f"points span {lx.max() - lx.min():.3g} decades, need {min_decades}")
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - A @ coef
    dof = max(1, len(lx) - 2)
    s2 = float(res @ res) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    return ExponentFit(float(coef[0]), float(coef[1]), float(math.sqrt(cov[0, 0])), tuple(float(r) for r in res))


# -- sweeps ------------------------------------------------------------------------
@dataclass(frozen=True)
class SweepRow:
    lam: float
    hbar: float
    T: float
    norm2: float
    defect_norm2: float
    width: float
    prediction: float
    j2_correction: float
    cylinder: str = ""

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "hbar": self.hbar,
            "T": self.T,
            "norm2": self.norm2,
            "defect_norm2": self.defect_norm2,
            "width": self.width,
            "prediction": self.prediction,
            "j2_correction": self.j2_correction,
            "cylinder": self.cylinder,
        }


def sweep_point(sch: ParameterSchedule, window: Window | str = "bump") -> SweepRow:
    from .quasimode import build, defect

    window = make_window(window) if isinstance(window, str) else window
    n2 = l2_norm_identity(build(sch, window))
    d2 = l2_norm_identity(defect(sch, window))
    pred = lemma_prediction(sch, window)
    return SweepRow(sch.lam, sch.hbar, sch.T, n2, d2, math.sqrt(d2 / n2), pred.value, pred.relative_correction, sch.cylinder.label)
