"""Acceptance suite A1-A8.

Each criterion prints one ``PASS``/``FAIL`` line with the measured values
and then asserts.  Run standalone with ``python tests/test_acceptance.py``.
"""

import math
import time
from itertools import product

import numpy as np
import pytest

from superscar.cylinders import (
    approximating_sequence,
    count_lengths,
    detect_cylinder,
    energy_constant,
    periodic_directions,
)
from superscar.momentum import (
    concentration,
    images_quasimode,
    linear_observable,
    make_observable,
    momentum_density,
    orbit_pairing,
    pair,
    symmetrized_density,
)
from superscar.polygon import equilateral, right_isoceles, triangle_from_angles, unfold, unit_square
from superscar.quasimode import build, evaluate_torus_grid, schedule
from superscar.spectral import bessel, fit_exponent, l2_norm_identity, lemma_prediction, spectral_width
from superscar.wavepacket import coherent_state, fft_oracle_grid, fft_propagate, propagate, sample

pytestmark = pytest.mark.slow

SQUARE = unfold(unit_square())
XI0 = np.array([1.0, math.sqrt(2)]) / math.sqrt(3)


def _sequence(eps, c_T=0.25):
    return approximating_sequence(SQUARE, XI0, 5, energy_constant(c_T, eps), eps)


def criterion_a1():
    """Norm law: slope 2.275 +- 0.05 in hbar; ratio to T hbar^3/2 within 2% of g~(0) sqrt(pi)/8."""
    eps = 0.05
    start = time.perf_counter()
    seq = _sequence(eps)
    pts, last = [], None
    for lam in np.logspace(3, 6, 7):  # hbar from 10^-1.5 to 10^-3
        sch = schedule(lam, eps, cylinder=seq.entry_for(lam).cylinder)
        norm2 = l2_norm_identity(build(sch))
        pts.append((lam, norm2))
        last = (sch, norm2)
    fit = fit_exponent(pts)
    slope = -2 * fit.slope  # hbar = lam^-1/2
    sch, norm2 = last
    C = lemma_prediction(sch).leading_constant
    ratio = norm2 / (sch.T * sch.hbar**1.5)
    elapsed = time.perf_counter() - start
    ok = abs(slope - 2.275) <= 0.05 and abs(ratio / C - 1) <= 0.02 and elapsed < 300
    return ok, f"slope {slope:.4f} (2.275 +- 0.05), ratio {ratio:.5f} vs C {C:.5f}, {elapsed:.0f} s"


def criterion_a2():
    """Spectral width: slope 3/8 + eps/4 +- 0.03 over 3 decades; width*T within a factor 1.2."""
    eps = 0.04
    seq = _sequence(eps)
    pts, wT = [], []
    for lam in np.logspace(4.5, 7.5, 7):
        sch = schedule(lam, eps, cylinder=seq.entry_for(lam).cylinder)
        w = spectral_width(sch)
        pts.append((lam, w))
        wT.append(w * sch.T)
    slope = fit_exponent(pts).slope
    target = 0.375 + eps / 4
    band = max(wT) / min(wT)
    ok = abs(slope - target) <= 0.03 and band <= 1.2
    return ok, f"slope {slope:.4f} ({target:.3f} +- 0.03), width*T band {band:.4f} (<= 1.2)"


def criterion_a3():
    """Identity vs grid quadrature, 1024^2 per chart, lam = 1e4, eps = 0.1: <= 1e-6 relative."""
    sch = schedule(1e4, 0.1, cylinder=detect_cylinder(SQUARE, (1, 2)))
    qm = build(sch)
    ident = l2_norm_identity(qm)
    grid, field = evaluate_torus_grid(qm, 2 * 1024)  # the 2x2 period holds 2x2 charts
    direct = float(np.sum(np.abs(field) ** 2) * grid.cell)
    rel = abs(ident - direct) / direct
    return rel <= 1e-6, f"relative difference {rel:.2e} (<= 1e-6)"


def criterion_a4():
    """Bessel suite."""
    xs = np.logspace(-2, 6, 81)
    worst = max(bessel(x).identity_error() for x in xs)
    asym = max(abs(bessel(x).J0 / math.sqrt(2 * math.pi / x) - 1) for x in np.logspace(4, 6, 9))
    sch = schedule(1e6, 0.05, cylinder=detect_cylinder(SQUARE, (2, 3)))
    corr = lemma_prediction(sch).relative_correction
    ok = worst <= 1e-10 and asym <= 0.01 and corr < 1e-3
    return ok, f"identity {worst:.1e} (<= 1e-10), asymptotic {asym:.1e} (<= 1e-2), J2 correction {corr:.1e} (< 1e-3)"


def criterion_a5():
    """Ball mass >= 1 - 1e-6 at hbar = 1e-2, eps = 0.1; pairing error slope >= 0.4 at eps = 0.05."""
    eps = 0.1
    lam = 1e4
    sch = schedule(lam, eps, cylinder=_sequence(eps).entry_for(lam).cylinder)
    d = momentum_density(build(sch), eps=eps)
    mass = concentration(d, d.center, sch.hbar ** (0.5 - eps))
    eps2 = 0.05
    seq = _sequence(eps2)
    a = linear_observable((math.cos(0.3), math.sin(0.3)))
    pts = []
    for h in np.logspace(-1, -3, 9):
        s = schedule(h**-2, eps2, cylinder=seq.entry_for(h**-2).cylinder)
        pts.append((h, abs(pair(momentum_density(build(s), eps=eps2), a) - a(XI0))))
    slope = fit_exponent(pts).slope
    ok = mass >= 1 - 1e-6 and slope >= 0.4
    return ok, f"ball mass {mass:.6f} (>= 0.999999), pairing slope {slope:.3f} (>= 0.4)"


def criterion_a6():
    """Torus closed forms to 1e-9, count at T = 100 within 5% of a lattice scan, integer genus."""
    worst = 0.0
    for p, q in [(1, 0), (1, 1), (1, 2), (2, 3), (3, 5), (4, -7)]:
        cyl = detect_cylinder(SQUARE, (p, q))
        worst = max(worst, abs(cyl.length / (2 * math.hypot(p, q)) - 1), abs(cyl.width * cyl.length / 4 - 1))
    T = 100.0
    count = count_lengths(periodic_directions(SQUARE, T), T)
    n = int(T // 2) + 1
    brute = sum(
        1 for p, q in product(range(-n, n + 1), repeat=2) if (p, q) != (0, 0) and math.gcd(p, q) == 1 and 4 * (p * p + q * q) <= T * T
    ) // 2
    dev = abs(count - brute) / brute
    genera, integral = [], True
    for poly in (unit_square(), right_isoceles(), equilateral(), triangle_from_angles([(1, 8), (3, 8), (1, 2)])):
        S = unfold(poly)
        # total cone excess is 2 pi (2g - 2)
        g = 1 + S.cone_angle_excess() / (4 * math.pi)
        integral &= abs(g - round(g)) < 1e-12 and round(g) == S.genus
        genera.append(S.genus)
    ok = worst <= 1e-9 and dev <= 0.05 and integral and genera == [1, 1, 1, 2]
    return ok, f"closed-form error {worst:.1e} (<= 1e-9), count {count} vs scan {brute} ({dev:.2%} <= 5%), genera {genera}"


def criterion_a7():
    """Images cross terms slope >= 4; orbit pairing within 5 hbar^(1/2-eps) Lip(a)."""
    eps = 0.1
    cyl = detect_cylinder(SQUARE, (1, 1))
    pts = []
    for h in (1e-1, 10**-1.5, 1e-2):
        qm = build(schedule(h**-2, eps, 0.125, cyl))
        im = images_quasimode(qm, 256)
        pts.append((h, abs(im.cross) / l2_norm_identity(qm)))
    slope = fit_exponent(pts, min_points=3, min_decades=1.0).slope
    a = make_observable(lambda xi: np.cos(xi @ np.array([1.0, 0.5])) + 0.3 * xi[..., 1])
    measured = pair(symmetrized_density(momentum_density(qm, eps=eps), SQUARE.group), a)
    atomic = orbit_pairing(qm.packet.xi0, SQUARE.group, a)
    gap, tol = abs(measured - atomic), 5 * 1e-2 ** (0.5 - eps) * a.lipschitz
    ok = slope >= 4 and gap <= tol
    return ok, f"cross-term slope {slope:.1f} (>= 4), orbit gap {gap:.2e} (<= {tol:.2f})"


def criterion_a8():
    """Closed form vs FFT: sup error <= 1e-8 at hbar = 0.05, t = hbar, 2048^2; unitarity drift <= 1e-12."""
    h = 0.05
    p = coherent_state((0.1, -0.2), (0.6, 0.8), h)
    g = fft_oracle_grid(p, h, 2048)
    err = float(np.max(np.abs(fft_propagate(sample(p, g), g, h) - sample(propagate(p, h), g))))
    drift = max(abs(propagate(p, t).norm2() / p.norm2() - 1) for t in (0.0, 0.01, 0.1, 1.0, 10.0, 100.0))
    return err <= 1e-8 and drift <= 1e-12, f"sup error {err:.1e} (<= 1e-8), unitarity drift {drift:.1e} (<= 1e-12)"


CRITERIA = {
    "A1": criterion_a1,
    "A2": criterion_a2,
    "A3": criterion_a3,
    "A4": criterion_a4,
    "A5": criterion_a5,
    "A6": criterion_a6,
    "A7": criterion_a7,
    "A8": criterion_a8,
}


def report(name):
    ok, detail = CRITERIA[name]()
    return ok, f"{name} {'PASS' if ok else 'FAIL'}: {detail}"


@pytest.mark.parametrize("name", list(CRITERIA))
def test_acceptance(name, capsys):
    ok, line = report(name)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


if __name__ == "__main__":
    for name in CRITERIA:
        print(report(name)[1], flush=True)
