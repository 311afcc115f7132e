import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ive

from superscar.cylinders import approximating_sequence, detect_cylinder, energy_constant
from superscar.errors import InsufficientSpan
from superscar.quasimode import build, defect, evaluate_torus_grid, make_window, schedule
from superscar.spectral import (
    bessel,
    bessel_J0,
    cos_moment,
    fit_exponent,
    l2_norm_identity,
    lemma_prediction,
    spectral_width,
    window_autocorr,
)

BUMP = make_window("bump")


def test_window_autocorr_support_and_scaling():
    T = 0.37
    wa = window_autocorr(BUMP.profile, T)
    assert np.all(wa(np.array([-2.01 * T, 2.01 * T, 5 * T])) == 0)
    assert wa(np.array([0.0]))[0] == pytest.approx(T * wa.g0, rel=1e-15)


def test_g_tilde_zero_oracle():
    # g~(0) = int G(u/2)^2 du = 2 int G(s)^2 ds
    ref = 2 * quad(lambda s: math.exp(2 - 2 / (1 - s * s)), -1, 1, epsabs=1e-16, epsrel=1e-13, limit=200)[0]
    assert window_autocorr(BUMP.profile, 1.0).g0 == pytest.approx(ref, rel=1e-12)


def test_g_tilde_is_autocorrelation():
    w = 0.7
    ref = quad(lambda u: BUMP.profile(np.array([(u + w) / 2]))[0] * BUMP.profile(np.array([(u - w) / 2]))[0], -2, 2, epsrel=1e-13, limit=200)[0]
    assert window_autocorr(BUMP.profile, 1.0).tilde(w)[0] == pytest.approx(ref, rel=1e-10)


@pytest.fixture(scope="module")
def a3_schedule(square_surface):
    return schedule(1e4, 0.1, cylinder=detect_cylinder(square_surface, (1, 2)))


def test_zero_norm(a3_schedule):
    assert l2_norm_identity(build(a3_schedule, scale=0.0)) == 0.0


def test_norm_identity_vs_grid(a3_schedule):
    qm = build(a3_schedule)
    rep = l2_norm_identity(qm, report=True)
    grid, field = evaluate_torus_grid(qm, 2048)
    direct = np.sum(np.abs(field) ** 2) * grid.cell
    assert abs(rep.value - direct) / direct <= 1e-6
    assert abs(rep.imag) < 1e-10 * rep.value
    assert rep.value > 0


def test_euclidean_reduction(square_surface):
    # cutoff state needs hbar^(1/2 - eps) > 10 hbar^(1/2)
    sch = schedule(10**5.2, 0.4, 0.25, detect_cylinder(square_surface, (0, 1)))
    cut = l2_norm_identity(build(sch, state="cutoff"))
    gauss = l2_norm_identity(build(sch), euclidean=True)
    assert abs(cut - gauss) <= math.exp(-(sch.hbar ** (-2 * sch.eps)) / 8) * gauss


def test_bessel_small_and_asymptotic():
    assert bessel_J0(1e-8) == pytest.approx(2 * math.pi, rel=1e-7)
    x = 1e4
    assert bessel(x).J0 == pytest.approx(math.sqrt(2 * math.pi / x), rel=0.01)
    assert math.sqrt(2 * math.pi / x) == pytest.approx(0.02507, abs=1e-5)


@pytest.mark.parametrize("x", np.logspace(-2, 6, 17))
def test_bessel_identity(x):
    assert bessel(x).identity_error() <= 1e-10


def test_cos_moment_identity():
    x = 50.0
    assert cos_moment(x, 2) == pytest.approx(2 * math.pi * ive(2, x), rel=1e-10)


def test_j2_closed_form():
    b = bessel(2000.0, 1e-3)
    assert b.J2 == pytest.approx(b.J2_from_I(), rel=1e-9)


def test_lemma_constant_and_correction(square_surface):
    cyl = detect_cylinder(square_surface, (2, 3))
    sch = schedule(1e6, 0.05, cylinder=cyl)
    pred = lemma_prediction(sch)
    assert pred.relative_correction < 1e-3
    assert pred.value / (sch.T * sch.hbar**1.5) == pytest.approx(pred.leading_constant, rel=2e-3)
    assert l2_norm_identity(build(sch)) == pytest.approx(pred.value, rel=0.02)


def test_defect_norm_law(square_surface, xi_target):
    seq = approximating_sequence(square_surface, xi_target, 5, energy_constant(0.25, 0.05), 0.05)
    ratios = []
    for lam in np.logspace(5, 9, 5):
        sch = schedule(lam, 0.05, cylinder=seq.entry_for(lam).cylinder)
        ratios.append(l2_norm_identity(defect(sch)) * sch.T / sch.hbar**1.5)
    ratios = np.array(ratios)
    assert np.all(np.abs(ratios / ratios.mean() - 1) <= 0.05)


def test_width_at_fixed_T(square_surface):
    cyl = detect_cylinder(square_surface, (1, 2))
    T0 = 0.1 * 1e4**-0.4
    lead = math.sqrt(window_autocorr(BUMP.derivative, 1).g0 / window_autocorr(BUMP.profile, 1).g0) / T0
    gaps = []
    for lam in (1e4, 2e4, 4e4, 8e4):
        sch = schedule(lam, 0.1, T0 / lam**-0.4, cyl, 1e30)
        assert sch.T == pytest.approx(T0)
        gaps.append(abs(spectral_width(sch) - lead) / lead)
    # the lambda dependence is a (hbar/T)^2 correction: halves with each doubling
    shrink = np.array(gaps[1:]) / np.array(gaps[:-1])
    assert np.all((shrink > 0.35) & (shrink < 0.65))


def test_fit_exact_power_and_constant():
    lam = np.logspace(2, 6, 9)
    assert fit_exponent(list(zip(lam, 3.0 * lam**0.375))).slope == pytest.approx(0.375, abs=1e-12)
    assert fit_exponent(list(zip(lam, np.full(lam.size, 2.0)))).slope == pytest.approx(0.0, abs=1e-12)


def test_fit_needs_span():
    with pytest.raises(InsufficientSpan):
        fit_exponent([(1e4, 1.0)])
    with pytest.raises(InsufficientSpan):
        fit_exponent([(x, x) for x in np.linspace(10, 20, 6)])
