"""Tests for hyperbolic/geometry.py — disk distances, Möbius isometries and sup distances."""

import math

import numpy as np
import pytest


def test_distance_from_origin_closed_form():
    """d(0, 1/2) = ln 3."""
    from hyperbolic.geometry import distance_from_origin

    assert distance_from_origin(0.5) == pytest.approx(math.log(3.0), abs=1e-12)


def test_distance_symmetric_and_vectorized():
    from hyperbolic.geometry import poincare_distance

    p = np.array([0.1 + 0.2j, -0.5j, 0.7 + 0.1j])
    q = np.array([0.3 - 0.4j, 0.2, -0.6 + 0.6j])
    assert np.allclose(poincare_distance(p, q), poincare_distance(q, p), atol=1e-12)
    assert poincare_distance(p, p) == pytest.approx(np.zeros(3), abs=1e-12)


def test_isometries_preserve_distance():
    """Möbius isometries of the disk are isometries of the Poincaré metric."""
    from hyperbolic.geometry import apply, compose, poincare_distance, rotation, translation_to

    m = compose(translation_to(0.4 - 0.3j), rotation(1.1))
    p, q = 0.2 + 0.5j, -0.7 + 0.1j
    assert poincare_distance(apply(m, p), apply(m, q)) == pytest.approx(poincare_distance(p, q), abs=1e-10)


def test_translation_moves_origin_to_target():
    from hyperbolic.geometry import distance_from_origin, translation_to

    m = translation_to(0.6 + 0.2j)
    assert abs(m.orbit_point - (0.6 + 0.2j)) < 1e-12
    assert m.displacement == pytest.approx(distance_from_origin(0.6 + 0.2j), abs=1e-12)


def test_compose_with_inverse_is_identity():
    from hyperbolic.geometry import IDENTITY, compose, invert, isclose, rotation, translation_to

    m = compose(rotation(0.3), translation_to(-0.2 + 0.7j))
    assert isclose(compose(m, invert(m)), IDENTITY)
    assert isclose(compose(invert(m), m), IDENTITY)


def test_fingerprint_ignores_sign():
    """(a, b) and (-a, -b) are the same map and share a fingerprint."""
    from hyperbolic.geometry import fingerprint, translation_to

    m = translation_to(0.3 + 0.3j)
    assert fingerprint(m.a, m.b) == fingerprint(-m.a, -m.b)


def test_bad_determinant_rejected():
    from errors import GeometryError
    from hyperbolic.geometry import Isometry

    with pytest.raises(GeometryError):
        Isometry(2.0 + 0j, 0j)


def test_boundary_points_rejected():
    from errors import GeometryError
    from hyperbolic.geometry import disk_point

    with pytest.raises(GeometryError):
        disk_point(1.0)


def test_rotation_displacement_closed_form():
    from hyperbolic.geometry import poincare_distance, rotation_displacement

    xi = 0.45 - 0.2j
    theta = 0.8
    assert rotation_displacement(xi, theta) == pytest.approx(
        poincare_distance(xi, np.exp(1j * theta) * xi), abs=1e-10
    )


def test_sup_distance_of_rotation_reaches_outer_ring():
    """A rotation moves every point of a circle equally, so the sup sits on the outer ring."""
    from hyperbolic.geometry import IDENTITY, point_at_distance, rotation, rotation_displacement, sup_orbit_distance

    R, theta = 3.0, 0.25
    expected = rotation_displacement(point_at_distance(R), theta)
    assert sup_orbit_distance(IDENTITY, rotation(theta), R, samples=64, rings=4) == pytest.approx(expected, rel=1e-9)


def test_sup_distance_nondecreasing_in_radius():
    from hyperbolic.geometry import sup_orbit_distance, translation_to

    m1, m2 = translation_to(0.1), translation_to(0.1 + 0.01j)
    values = [sup_orbit_distance(m1, m2, R, samples=64, rings=4) for R in (1.0, 2.0, 4.0)]
    assert values == sorted(values)


def test_sup_distance_argument_checks():
    from hyperbolic.geometry import IDENTITY, sup_orbit_distance

    with pytest.raises(ValueError):
        sup_orbit_distance(IDENTITY, IDENTITY, 0.0)
    with pytest.raises(ValueError):
        sup_orbit_distance(IDENTITY, IDENTITY, 1.0, samples=16)


def test_divergence_threshold_brackets_eps():
    """At lo the translations stay eps-close on the disk, at hi they do not."""
    from hyperbolic.geometry import apply, divergence_threshold, point_at_distance, sup_orbit_distance, translation_to

    a, direction, R, eps = 0.3 + 0j, 0.5, 3.0, 0.1
    lo, hi = divergence_threshold(a, direction, R, eps, samples=64, rings=4, iterations=40)
    assert 0 < lo <= hi

    def spread(delta):
        b = apply(translation_to(a), point_at_distance(delta, direction))
        return sup_orbit_distance(translation_to(a), translation_to(b), R, 64, 4)

    assert spread(lo) <= eps < spread(hi)


def test_calibrated_constant_at_least_one():
    """hi/lo >= 1 forces max(e^-R/lo, hi·e^R) >= 1."""
    from hyperbolic.geometry import calibrate_automorphism_constant

    calibration = calibrate_automorphism_constant(0.1, R_grid=(3.0,), bases=(0j, 0.3j), directions=(0.0,),
                                                  samples=64, rings=4)
    assert calibration.constant >= 1.0
    assert len(calibration.thresholds) == 2


def test_calibrated_constant_nonincreasing_in_eps():
    from hyperbolic.geometry import calibrate_automorphism_constant

    grid = dict(R_grid=(3.0, 4.0), bases=(0j, 0.3j), directions=(0.0, 1.0), samples=64, rings=4)
    constants = [calibrate_automorphism_constant(eps, **grid).constant for eps in (0.2, 0.1, 0.05)]
    assert all(np.isfinite(constants))
    assert constants[0] <= constants[1] <= constants[2]


def test_calibrated_constant_separates_both_regimes():
    """Closer than e^-R/A stays eps-close on the R-disk, farther than A·e^-R does not."""
    from hyperbolic.geometry import (
        apply, calibrate_automorphism_constant, point_at_distance, sup_orbit_distance, translation_to,
    )

    eps = 0.1
    calibration = calibrate_automorphism_constant(eps, R_grid=(3.0, 4.0), bases=(0j, 0.3j), directions=(0.0, 1.0),
                                                  samples=64, rings=4)
    A = calibration.constant
    for R, a, direction, _, _ in calibration.thresholds:
        tau_a = translation_to(a)

        def spread(delta):
            b = apply(tau_a, point_at_distance(delta, direction))
            return sup_orbit_distance(tau_a, translation_to(b), R, 64, 4)

        assert spread(math.exp(-R) / A) <= eps
        assert spread(A * math.exp(-R)) > eps


def test_distance_invariance_and_triangle_inequality():
    from hyperbolic.geometry import apply, compose, poincare_distance, rotation, translation_to

    rng = np.random.default_rng(7)
    count = 1000
    radii = np.tanh(rng.uniform(0.0, 2.5, size=(3, count)))
    points = radii * np.exp(2j * np.pi * rng.random((3, count)))
    x, y, z = points
    dxy, dyz, dxz = poincare_distance(x, y), poincare_distance(y, z), poincare_distance(x, z)
    assert np.all(dxz <= dxy + dyz + 1e-9)

    m = compose(translation_to(0.35 - 0.2j), rotation(1.3))
    assert np.allclose(poincare_distance(apply(m, x), apply(m, y)), dxy, rtol=1e-9, atol=1e-9)


def test_canonical_form_idempotent():
    from hyperbolic.geometry import Isometry, canonical_sign, compose, rotation, translation_to

    m = compose(rotation(2.5), translation_to(-0.4 + 0.1j))
    flipped = Isometry(-m.a, -m.b)
    once = flipped.canonical()
    assert once.canonical() == once
    assert once == m

    rng = np.random.default_rng(1)
    a = rng.normal(size=50) + 1j * rng.normal(size=50)
    b = 0.1 * (rng.normal(size=50) + 1j * rng.normal(size=50))
    a1, b1 = canonical_sign(a, b)
    a2, b2 = canonical_sign(a1, b1)
    assert np.array_equal(a1, a2) and np.array_equal(b1, b2)


def test_long_compositions_keep_unit_determinant():
    from hyperbolic.geometry import compose_all, rotation, translation_to

    rng = np.random.default_rng(4)
    steps = [translation_to(0.1 * np.exp(2j * np.pi * t)) for t in rng.random(400)]
    steps += [rotation(t) for t in rng.random(100)]
    rng.shuffle(steps)
    m = compose_all(steps)
    assert abs(abs(m.a) ** 2 - abs(m.b) ** 2 - 1.0) <= 1e-10 * abs(m.a) ** 2


@pytest.mark.parametrize("eps", [0.1, 0.05])
def test_rotation_displacement_regimes(eps):
    """Tiny angles barely move far points, and sin(theta/2) above 4·eps·e^-R moves them by at least eps."""
    from hyperbolic.geometry import point_at_distance, rotation_displacement

    sines = np.logspace(-12, 0, 400)
    theta = 2.0 * np.arcsin(sines)
    for R in range(5, 15):
        xi = point_at_distance(float(R), 0.3)
        d = rotation_displacement(xi, theta)
        small = math.exp(-R) >= 8.0 * sines / eps
        large = math.exp(-R) <= 0.25 * sines / eps
        assert small.any() and large.any()
        assert np.all(d[small] <= eps)
        assert np.all(d[large] >= eps)
