import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superscar.errors import CutoffTooTight, InputError
from superscar.wavepacket import (
    CHI,
    Grid2D,
    autocorrelation,
    coherent_state,
    cutoff_state,
    fft_oracle_grid,
    fft_propagate,
    gamma_hat,
    grid_norm2,
    localization_tail,
    propagate,
    sample,
)


def test_value_at_centre():
    h = 0.01
    x0, xi0 = (0.3, -0.1), (0.6, 0.8)
    p = coherent_state(x0, xi0, h)
    expected = math.sqrt(math.pi / h) / (2 * math.pi) * np.exp(1j * np.dot(xi0, x0) / h)
    assert p(*x0) == pytest.approx(expected, rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-4, 0.5), st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 2 * math.pi))
def test_norm_is_one_quarter(h, x, y, theta):
    p = coherent_state((x, y), (math.cos(theta), math.sin(theta)), h)
    assert p.norm2() == pytest.approx(0.25, rel=1e-12)


def test_norm_and_moment_on_grid():
    h = 0.02
    p = coherent_state((0.1, 0.2), (1.0, 0.0), h)
    g = Grid2D.centered((0.1, 0.2), 1.5, 512)
    f = sample(p, g)
    assert grid_norm2(f, g) == pytest.approx(0.25, rel=1e-12)
    X, Y = g.mesh()
    moment = np.sum(((X - 0.1) ** 2 + (Y - 0.2) ** 2) * np.abs(f) ** 2) * g.cell / 0.25
    assert moment == pytest.approx(h, rel=1e-10)
    assert p.position_variance() == pytest.approx(h)


def test_unit_direction_required():
    with pytest.raises(InputError):
        coherent_state((0, 0), (1.0, 1.0), 0.1)


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_unitarity(t):
    p = coherent_state((0, 0), (0.6, 0.8), 0.01)
    assert propagate(p, t).norm2() == pytest.approx(p.norm2(), rel=1e-12)


def test_propagate_identity_and_centre():
    p = coherent_state((0.2, 0.1), (0.6, 0.8), 0.05)
    assert propagate(p, 0.0) == p
    t = 0.03
    assert np.allclose(propagate(p, t).center, np.array([0.2, 0.1]) + 2 * t * np.array([0.6, 0.8]) / 0.05)


def test_fft_oracle():
    h = 0.05
    p = coherent_state((0.1, -0.2), (0.6, 0.8), h)
    g = fft_oracle_grid(p, h, 1024)
    f = fft_propagate(sample(p, g), g, h)
    exact = sample(propagate(p, h), g)
    assert np.max(np.abs(f - exact)) <= 1e-8
    assert grid_norm2(f, g) == pytest.approx(grid_norm2(exact, g), rel=1e-8)


def test_semigroup():
    p = coherent_state((0, 0), (1.0, 0.0), 0.05)
    g = Grid2D.centered((0.5, 0), 1.5, 256)
    a = sample(propagate(propagate(p, 0.01), 0.02), g)
    b = sample(propagate(p, 0.03), g)
    assert np.max(np.abs(a - b)) <= 1e-10


def test_autocorrelation_properties():
    p = coherent_state((0, 0), (0.6, 0.8), 0.01)
    assert autocorrelation(p, 0.0) == pytest.approx(0.25, rel=1e-14)
    v = 0.0037
    assert autocorrelation(p, -v) == pytest.approx(np.conj(autocorrelation(p, v)), rel=1e-13)
    assert abs(autocorrelation(p, 10 * 0.01)) <= 1e-12


def test_autocorrelation_against_grid():
    h = 0.05
    p = coherent_state((0, 0), (0.6, 0.8), h)
    v = 0.004
    g = fft_oracle_grid(p, v, 512)
    direct = np.sum(sample(p, g) * np.conj(sample(propagate(p, v), g))) * g.cell
    assert autocorrelation(p, v) == pytest.approx(direct, rel=1e-9)


def test_gamma_hat():
    assert gamma_hat([0.0, 0.0]) == pytest.approx(1 / (2 * math.pi))
    for r in (1.0, 2.0, 3.0):
        a = gamma_hat([r, 0.0])
        b = gamma_hat([r / math.sqrt(2), r / math.sqrt(2)])
        assert a == pytest.approx(b, rel=1e-14)
        assert a / gamma_hat([0, 0]) == pytest.approx(math.exp(-(r**2) / 2), rel=1e-14)


def test_gamma_hat_numerical_transform():
    g = Grid2D.centered((0, 0), 10.0, 256)
    X, Y = g.mesh()
    gam = np.exp(-(X**2 + Y**2) / 2) / (2 * math.pi)
    for k in (1.0, 2.0, 3.0):
        num = np.sum(gam * np.exp(-1j * k * X)) * g.cell / (2 * math.pi)
        assert num.real == pytest.approx(gamma_hat([k, 0.0]), rel=1e-10)


def test_cutoff_profile():
    assert CHI(np.array([0.0, 0.5]))[1] == 1.0
    assert CHI(np.array([1.0, 2.0])).tolist() == [0.0, 0.0]


def test_cutoff_too_tight():
    p = coherent_state((0, 0), (1.0, 0.0), 0.01)
    with pytest.raises(CutoffTooTight):
        cutoff_state(p, 0.1)


def test_cutoff_state_exactness_and_tail():
    h = 1e-4
    p = coherent_state((0, 0), (1.0, 0.0), h)
    c = cutoff_state(p, 0.4)
    r = c.radius
    assert c(0.49 * r, 0.0) == p(0.49 * r, 0.0)
    assert c(1.01 * r, 0.0) == 0
    assert c.tail_mass() / p.norm2() <= 1e-10


@pytest.mark.parametrize("h", [1e-2, 1e-3])
def test_localization(h):
    eps = 0.1
    r = h ** (0.5 - eps)
    # exact radial integral of the Gaussian weight outside r
    z, w = np.polynomial.legendre.leggauss(400)
    s = r + 20 * math.sqrt(h) * 0.5 * (z + 1)
    outside = np.sum(10 * math.sqrt(h) * w * s * np.exp(-(s**2) / h)) * 2 / h
    assert outside == pytest.approx(localization_tail(h, eps), rel=1e-8)
    assert localization_tail(h, eps) <= math.exp(-(h ** (-2 * eps)) / 4)
