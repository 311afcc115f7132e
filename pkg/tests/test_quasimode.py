import math

import numpy as np
import pytest
from scipy.integrate import quad

from superscar.cylinders import detect_cylinder, energy_exponent
from superscar.errors import EnergyOutOfRange, HitConePoint, QuadratureUnderresolved
from superscar.polygon import SurfacePoint
from superscar.quasimode import (
    Quasimode,
    Window,
    build,
    composite_gauss,
    defect,
    evaluate,
    evaluate_torus_grid,
    make_window,
    node_count,
    schedule,
    self_intersection_report,
)
from superscar.spectral import l2_norm_identity
from superscar.wavepacket import coherent_state


@pytest.fixture(scope="module")
def horizontal(square_surface):
    return detect_cylinder(square_surface, (1, 0), label="(1,0)")


@pytest.fixture(scope="module")
def coarse(horizontal):
    # hbar = 0.05
    return schedule(400.0, 0.1, cylinder=horizontal)


@pytest.mark.parametrize("kind", ["bump-default", "cosine-taper"])
def test_window_shape(kind):
    w = make_window(kind)
    assert w.profile(np.array([0.0]))[0] == 1.0
    assert np.all(w.profile(np.array([-1.0, 1.0])) == 0)
    assert np.all(np.abs(w.derivative(np.array([-1.0, 1.0]))) < 1e-15)
    t, wt = composite_gauss(-1, 1, 256)
    assert np.sum(wt * w.profile(t)) == pytest.approx(quad(lambda x: float(w.profile(np.array([x]))[0]), -1, 1, epsabs=1e-14)[0], abs=1e-12)


def test_window_derivative_consistent():
    w = make_window("bump")
    tau = np.linspace(-0.9, 0.9, 7)
    num = (w.profile(tau + 1e-6) - w.profile(tau - 1e-6)) / 2e-6
    assert np.allclose(num, w.derivative(tau), atol=1e-8)


def test_schedule_formulas(horizontal):
    eps = 0.05
    with pytest.raises(EnergyOutOfRange):
        schedule(1e6, eps, 1.0, horizontal)
    lam = 1e6
    h = lam**-0.5
    assert h == pytest.approx(1e-3)
    assert 1.0 * h ** (0.75 + eps / 2) == pytest.approx(4.73e-3, rel=2e-3)


def test_schedule_boundary_accepted(horizontal):
    eps = 0.1
    c = 1.0
    lam = c * horizontal.length ** energy_exponent(eps)
    sch = schedule(lam, eps, 0.25, horizontal, c)
    assert sch.lam == lam
    with pytest.raises(EnergyOutOfRange):
        schedule(lam * (1 + 1e-9), eps, 0.25, horizontal, c)


def test_zero_window(coarse):
    qm = build(coarse, scale=0.0)
    assert qm.is_zero()
    assert l2_norm_identity(qm) == 0.0


def test_node_count_doubles(horizontal):
    eps = 0.1
    a = schedule(1e4, eps, 0.25, detect_cylinder(horizontal.surface, (1, 2)))
    # same T at twice the energy: the phase rule doubles the count
    b = schedule(2e4, eps, 0.25 * 2 ** ((0.75 + eps / 2) / 2), a.cylinder, a.c)
    assert b.T == pytest.approx(a.T)
    assert node_count(b) / node_count(a) == pytest.approx(2.0, rel=1e-3)
    with pytest.raises(QuadratureUnderresolved):
        build(a, n_nodes=node_count(a) // 2)


def test_norm_two_paths(coarse):
    qm = build(coarse)
    grid, field = evaluate_torus_grid(qm, 2048)
    direct = np.sum(np.abs(field) ** 2) * grid.cell
    assert direct == pytest.approx(l2_norm_identity(qm), rel=1e-6)


def test_defect_fft_laplacian(coarse):
    qm = build(coarse)
    grid, field = evaluate_torus_grid(qm, 512)
    kx = 2 * math.pi * np.fft.fftfreq(grid.x.size, grid.x[1] - grid.x[0])
    ky = 2 * math.pi * np.fft.fftfreq(grid.y.size, grid.y[1] - grid.y[0])
    KX, KY = np.meshgrid(kx, ky)
    applied = np.fft.ifft2(np.fft.fft2(field) * (coarse.lam - KX**2 - KY**2))
    direct = np.sum(np.abs(applied) ** 2) * grid.cell
    assert direct == pytest.approx(l2_norm_identity(defect(coarse)), rel=1e-5)


def test_defect_linearity(coarse):
    one = l2_norm_identity(defect(coarse))
    assert l2_norm_identity(defect(coarse, scale=2.0)) == pytest.approx(4 * one, rel=1e-12)


def test_flat_window_piece_contributes_nothing(coarse):
    def prof(t):
        t = np.asarray(t, dtype=float)
        return np.where(np.abs(t) <= 0.5, 1.0, make_window("bump").profile((np.abs(t) - 0.5) * 2))

    def deriv(t):
        t = np.asarray(t, dtype=float)
        return np.where(np.abs(t) <= 0.5, 0.0, 2 * np.sign(t) * make_window("bump").derivative((np.abs(t) - 0.5) * 2))

    d = defect(coarse, Window("plateau", prof, deriv))
    flat = np.abs(d.nodes) < 0.5 * coarse.T
    assert np.all(d.coefficients[flat] == 0)
    assert np.any(d.coefficients[~flat] != 0)


def test_quadrature_convergence(coarse):
    a = l2_norm_identity(build(coarse))
    b = l2_norm_identity(build(coarse, n_nodes=2 * node_count(coarse)))
    assert abs(a - b) / a < 1e-8


def test_evaluate_empty_and_single_node(coarse):
    qm = build(coarse)
    assert evaluate(qm, []).size == 0
    one = Quasimode(coarse, qm.window, "main", np.array([0.0]), np.array([1.0]), np.array([1.0 + 0j]), qm.packet)
    core = coarse.cylinder.core_point
    off = np.array([0.03, -0.02])
    value = evaluate(one, [SurfacePoint.make(core.chart_id, core.xy + off)])[0]
    assert value == pytest.approx(qm.packet(*off), rel=1e-12)


def test_lift_consistency(coarse):
    qm = build(coarse)
    cyl = coarse.cylinder
    s = np.linspace(0, cyl.length, 9, endpoint=False) + 0.013
    pts = [cyl.surface.transport(cyl.core_point, cyl.direction, si) for si in s]
    on_surface = evaluate(qm, pts)
    planar = qm.planar(np.stack([s, np.zeros_like(s)], axis=-1))
    assert np.max(np.abs(on_surface - planar)) <= 1e-12 * np.max(np.abs(planar)) + 1e-300


def test_no_self_intersection(square_surface):
    sch = schedule(1e4, 0.1, cylinder=detect_cylinder(square_surface, (1, 2)))
    report = self_intersection_report(sch)
    assert report["disjoint"] and report["span"] < report["length"]


def test_cone_point_evaluation(octagon_surface):
    cyl = detect_cylinder(octagon_surface, (math.cos(math.pi / 8), math.sin(math.pi / 8)))
    sch = schedule(1e3, 0.2, 0.01, cyl, 1.0)
    qm = build(sch)
    (cp,) = octagon_surface.cone_points
    with pytest.raises(HitConePoint):
        evaluate(qm, [cp.point])
