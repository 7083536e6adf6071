"""Tests for dynamics/zcase.py — K0 estimates, exact shift counts, Brin-Katok values and bound comparisons."""

import math

import numpy as np
import pytest


# ── Powers inside balls ──

def test_k0_superadditive_and_bounded(regular_group, reduction_ball, reduction_table):
    from dynamics.zcase import k0_estimate

    w = regular_group.weights["a1"]
    R_grid = [1.0001 * w, 4.0, 6.0, 8.0]
    estimate = k0_estimate(regular_group, {"a1": 1}, R_grid, reduction_ball, reduction_table)
    assert estimate.superadditivity_violations == 0
    assert estimate.bound_violations == 0
    assert estimate.certified >= 1.0 / (1.0001 * w) - 1e-12
    assert list(estimate.table["running_sup"]) == sorted(estimate.table["running_sup"])
    assert estimate.generator_bound == pytest.approx(1.0 / w)


def test_k0_rejects_trivial_exponents(regular_group, reduction_ball):
    from errors import DegenerateInputError
    from dynamics.zcase import k0_estimate

    with pytest.raises(DegenerateInputError):
        k0_estimate(regular_group, {"a1": 0}, [4.0, 8.0], reduction_ball)


def test_exponent_set_symmetric(reduction_ball):
    from dynamics.zcase import exponent_set, n_of_R

    powers = exponent_set(reduction_ball.restrict(7.0), {"a1": 1})
    assert list(powers.values) == sorted(-powers.values)
    assert powers.max_gap == 1
    assert n_of_R(reduction_ball.restrict(7.0), {"a1": 1}) == int(powers.values.max())


def test_k0_bounds_bracket():
    from dynamics.zcase import k0_bounds

    weights = {"a1": 2.0, "A1": 2.0, "b1": 3.0, "B1": 3.0}
    lo, hi = k0_bounds(10.0, {"a1": 1}, weights, K=4)
    assert lo == 5
    assert hi == 80


def test_formula():
    from dynamics.zcase import casz_formula

    assert casz_formula(0.25, math.log(2.0)) == pytest.approx(2.0 + 0.5 * math.log(2.0))


# ── Exact shift counts ──

def test_exact_counts():
    from dynamics.zcase import shift_bowen_count_exact

    assert shift_bowen_count_exact(2, 3, 2) == 2 ** 8
    assert shift_bowen_count_exact(2, 3, 2, two_sided=True) == 2 ** 11
    assert shift_bowen_count_exact(3, 0, 0) == 3


def test_window_count_reduces_to_interval():
    """An interval of exponents gives the one-sided count."""
    from dynamics.zcase import shift_bowen_count_exact, shift_window_count

    assert shift_window_count(2, range(0, 4), 2) == shift_bowen_count_exact(2, 3, 2)
    assert shift_window_count(2, [0, 10], 1) == 2 ** 6


def test_exact_counts_reject_bad_input():
    from errors import InvalidSystemError
    from dynamics.zcase import shift_bowen_count_exact

    with pytest.raises(InvalidSystemError):
        shift_bowen_count_exact(1, 3, 2)


@pytest.mark.parametrize("n,m", [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)])
def test_two_sided_identity_on_shift(n, m):
    """Both counts over the same centers equal the two-sided cylinder count."""
    from dynamics.transversal import FullShift
    from dynamics.zcase import shift_bowen_count_exact, two_sided_identity_check

    system = FullShift(2, 16, depth=4)
    centers = system.exhaustive(-n - m, 2 * n + m)
    check = two_sided_identity_check(system, n, 2.0 ** -m, centers, seed=5)
    expected = shift_bowen_count_exact(2, n, m, two_sided=True)
    assert expected == 2 ** (2 * (n + m) + 1)
    assert check.two_sided == expected
    assert check.one_sided == expected
    assert check.equal


def test_two_sided_and_one_sided_counts_differ_on_narrow_centers():
    """Centers varying only on the two-sided window separate fewer one-sided points."""
    from dynamics.transversal import FullShift
    from dynamics.zcase import two_sided_identity_check

    n, m = 2, 1
    system = FullShift(2, 16, depth=4)
    centers = system.exhaustive(-n - m, n + m)
    check = two_sided_identity_check(system, n, 2.0 ** -m, centers)
    assert check.two_sided == 2 ** (2 * (n + m) + 1)
    assert check.one_sided == 2 ** (n + 2 * m + 1)
    assert not check.equal


def test_two_sided_identity_on_catmap_grid():
    from dynamics.transversal import CatMap
    from dynamics.zcase import two_sided_identity_check

    system = CatMap()
    check = two_sided_identity_check(system, 2, 0.2, system.grid(5), seed=1)
    assert check.matched
    assert check.equal
    assert 1 < check.two_sided < 32 * 32


def test_random_catmap_centers_are_not_matched():
    from dynamics.transversal import CatMap
    from dynamics.zcase import two_sided_identity_check

    system = CatMap()
    check = two_sided_identity_check(system, 1, 0.2, system.sample(200, seed=8), seed=1)
    assert not check.matched


# ── Measures ──

def test_reference_entropies():
    from dynamics.transversal import CatMap, CircleRotation, FullShift
    from dynamics.zcase import reference_htop

    assert reference_htop(FullShift(3, 8)) == pytest.approx(math.log(3.0))
    assert reference_htop(CircleRotation(0.3)) == 0.0
    assert reference_htop(CatMap()) == pytest.approx(math.log((3.0 + math.sqrt(5.0)) / 2.0))


def test_bernoulli_entropy_validation():
    from errors import InvalidSystemError
    from dynamics.zcase import bernoulli_entropy

    assert bernoulli_entropy([0.5, 0.5]) == pytest.approx(math.log(2.0), abs=1e-15)
    with pytest.raises(InvalidSystemError):
        bernoulli_entropy([0.5, 0.6])


def test_cylinder_identity():
    """-log of the cylinder product equals the summed symbol costs."""
    from dynamics.transversal import FullShift
    from dynamics.zcase import brin_katok_two_sided, cylinder_measure

    p = np.array([0.7, 0.3])
    system = FullShift(2, 60, depth=8)
    t = system.sample(1, seed=3, p=p)[0]
    value = brin_katok_two_sided(p, t, 50, 3)
    assert -math.log(cylinder_measure(p, t, 50, 3)) == pytest.approx(value.neg_log_measure, abs=1e-9)


def test_uniform_measure_exact():
    from dynamics.zcase import brin_katok_table

    frame = brin_katok_table([0.5, 0.5], 100, 2, 10, seed=0)
    assert np.allclose(frame["corrected_value"], math.log(2.0), atol=1e-12)


def test_biased_measure_corrected_value():
    """Mean over 100 samples lands within 2% of the measure entropy 0.610864."""
    from dynamics.zcase import brin_katok_table

    frame = brin_katok_table([0.7, 0.3], 200, 2, 100, seed=0)
    assert frame["corrected_value"].mean() == pytest.approx(0.610864, rel=0.02)
    rescaled = frame["paper_value"].mean() * 200 / 202
    assert rescaled == pytest.approx(2.0 * 0.610864, rel=0.05)


def test_gamma_measure_on_interval():
    """Exponents -n..n reproduce the two-sided ball."""
    from dynamics.transversal import FullShift
    from dynamics.zcase import brin_katok_gamma, brin_katok_two_sided

    p = np.array([0.6, 0.4])
    t = FullShift(2, 30, depth=8).sample(1, seed=2, p=p)[0]
    assert brin_katok_gamma(p, t, range(-5, 6), 2) == pytest.approx(
        brin_katok_two_sided(p, t, 5, 2).neg_log_measure, abs=1e-12
    )


def test_variational_principle_on_full_shift():
    from dynamics.zcase import variational_check

    check = variational_check(3, seed=1)
    assert check.holds
    assert check.attained


# ── Bound comparison ──

def test_noninvariance_bounds(regular_group, reduction_table):
    from dynamics.zcase import noninvariance_check

    report = noninvariance_check(regular_group, reduction_table)
    assert report.eps == pytest.approx(0.5 * report.weight_regular / reduction_table.K_prime)
    assert report.weight_degenerate <= report.eps
    assert report.holds
