import math
from itertools import product

import numpy as np
import pytest

from superscar.cylinders import (
    Cylinder,
    approximating_sequence,
    containment_check,
    count_lengths,
    cylinder_for_entry,
    detect_cylinder,
    energy_constant,
    max_admissible_time,
    periodic_directions,
    saddle_connections,
)
from superscar.errors import BoundExceeded, NotPeriodic
from superscar.polygon import SurfacePoint
from superscar.spectral import fit_exponent


def primitive_count(T):
    """Brute-force scan of primitive (p, q) with 2 sqrt(p^2 + q^2) <= T, up to sign."""
    n = int(T // 2) + 1
    return sum(
        1
        for p, q in product(range(-n, n + 1), repeat=2)
        if (p, q) != (0, 0) and math.gcd(p, q) == 1 and 4 * (p * p + q * q) <= T * T
    ) // 2


@pytest.mark.parametrize("p, q", [(1, 0), (0, 1), (1, 1), (1, 2), (3, 2), (5, -3)])
def test_torus_cylinder_closed_forms(square_surface, p, q):
    cyl = detect_cylinder(square_surface, (p, q))
    assert cyl.length == pytest.approx(2 * math.hypot(p, q), rel=1e-9)
    assert cyl.width * cyl.length == pytest.approx(4.0, rel=1e-9)


def test_irrational_direction(square_surface):
    with pytest.raises(NotPeriodic):
        detect_cylinder(square_surface, (1, math.sqrt(2)), cap=200.0)


def test_torus_spectrum(square_surface):
    spec = periodic_directions(square_surface, 5.0)
    lengths = sorted(spec.lengths)
    expected = sorted(2 * math.hypot(p, q) for p, q in [(1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1)])
    assert np.allclose(lengths, expected, rtol=1e-12)
    assert periodic_directions(square_surface, 1.9).entries == []


def test_count_lengths(square_surface):
    spec = periodic_directions(square_surface, 100.0)
    assert count_lengths(spec, 1.0) == 0
    counts = [count_lengths(spec, T) for T in (10, 20, 50, 100)]
    assert counts == sorted(counts)
    brute = primitive_count(100.0)
    assert abs(counts[-1] - brute) / brute <= 0.05
    ratios = [count_lengths(spec, T) / T**2 for T in np.linspace(10, 100, 10)]
    assert (max(ratios) - min(ratios)) / np.mean(ratios) < 0.1
    with pytest.raises(BoundExceeded):
        count_lengths(spec, 200.0)


def test_octagon_spectrum_self_consistent(octagon_surface):
    spec = periodic_directions(octagon_surface, 3.0)
    assert spec.entries
    for e in spec.entries:
        cyl = cylinder_for_entry(octagon_surface, e)
        assert cyl.length == pytest.approx(e.length, rel=1e-9)
        assert cyl.width == pytest.approx(e.width, rel=1e-9)


def test_octagon_cylinder_decomposition(octagon_surface):
    d = (math.cos(math.pi / 8), math.sin(math.pi / 8))
    spec = periodic_directions(octagon_surface, 3.0)
    parts = [e for e in spec.entries if abs(e.angle - math.pi / 8) < 1e-9]
    assert sum(e.length * e.width for e in parts) == pytest.approx(octagon_surface.area, rel=1e-9)
    assert len(parts) == 2
    found = detect_cylinder(octagon_surface, d).length
    assert min(abs(found - e.length) for e in parts) < 1e-9


def test_saddle_connections(octagon_surface):
    sc = saddle_connections(octagon_surface, 2.0)
    lengths = sorted({round(math.hypot(*s.vector), 4) for s in sc})
    assert lengths[0] == pytest.approx(2 * math.sin(math.pi / 8), abs=1e-4)


def test_locate_round_trip(diagonal_cylinder):
    cyl = diagonal_cylinder
    rng = np.random.default_rng(0)
    for _ in range(50):
        s, u = rng.uniform(0, cyl.length), rng.uniform(-0.49, 0.49) * cyl.width
        pt = cyl.surface.transport(cyl.core_point, cyl.normal * np.sign(u or 1), abs(u))
        pt = cyl.surface.transport(pt, cyl.direction, s)
        s2, u2 = cyl.locate(pt)
        assert u2 == pytest.approx(u, abs=1e-9)
        assert (s2 - s + 1e-9) % cyl.length < 2e-9


def test_sequence_convergents(square_surface, xi_target):
    seq = approximating_sequence(square_surface, xi_target, 5, c=1.0, eps=0.1)
    labels = [e.cylinder.label for e in seq.entries]
    assert labels == ["(0,1)", "(1,1)", "(2,3)", "(5,7)", "(12,17)"]
    # numerators and denominators of the convergents of sqrt(2)
    errors = [e.angle_error for e in seq.entries]
    lengths = [e.cylinder.length for e in seq.entries]
    assert all(a > b for a, b in zip(errors, errors[1:]))
    assert all(a < b for a, b in zip(lengths, lengths[1:]))
    for a, b in zip(seq.entries, seq.entries[1:]):
        assert a.interval[1] == b.interval[0]


def test_sequence_periodic_target(square_surface):
    seq = approximating_sequence(square_surface, (1.0, 0.0), 1, c=1.0, eps=0.1)
    assert seq.entries[0].angle_error == pytest.approx(0.0, abs=1e-12)


def test_energy_constant_matches_travel_bound():
    assert energy_constant(0.25, 0.05) == pytest.approx(1.0)
    assert energy_constant(0.125, 0.1) == pytest.approx(2.0 ** 10)


def _fake(length, width):
    return Cylinder(np.array([1.0, 0.0]), length, width, SurfacePoint.make(0, (0, 0)), None)


def test_containment_examples(square_surface):
    cyl = detect_cylinder(square_surface, (1, 0))
    h = 1e-4
    assert containment_check(cyl, h, 0.1, 0.0)
    assert not containment_check(cyl, h, 0.1, 2 * h * cyl.length)


def test_admissible_time_scaling():
    eps = 0.1
    pts = []
    for h in np.logspace(-5, -9, 9):
        L = h ** (-0.25 + eps / 2)
        pts.append((h, max_admissible_time(_fake(L, 1 / L), h, eps)))
    assert fit_exponent(pts).slope == pytest.approx(0.75 + eps / 2, abs=0.05)
