"""Tests for hyperbolic/ballenum.py — breadth-first ball enumeration, dedup and word checks."""

import numpy as np
import pytest


def test_radius_zero_is_identity(regular_group):
    from hyperbolic.ballenum import enumerate_ball

    ball = enumerate_ball(regular_group, 0.0)
    assert len(ball) == 1
    assert ball.words == ((),)


def test_first_shell_is_the_generators(regular_group):
    """Below the vertex-neighbor distance only the 8 side neighbors join the identity."""
    from hyperbolic.ballenum import enumerate_ball

    ball = enumerate_ball(regular_group, regular_group.R0 + 0.05)
    assert len(ball) == 9
    assert sorted(w for w in ball.words if w) == sorted((x,) for x in regular_group.labels)


def test_ball_sorted_by_displacement(regular_group):
    from hyperbolic.ballenum import enumerate_ball

    ball = enumerate_ball(regular_group, 6.0)
    assert np.all(np.diff(ball.displacements) >= -1e-9)
    assert ball.displacements.max() <= 6.0 + 1e-9


def test_word_residual_small(regular_group):
    from hyperbolic.ballenum import enumerate_ball, word_residual

    assert word_residual(regular_group, enumerate_ball(regular_group, 6.0)) <= 1e-9


def test_dual_slack_agreement(regular_group):
    """Doubling the pruning slack finds no extra elements."""
    from hyperbolic.ballenum import enumerate_ball

    slack = regular_group.polygon.circumradius
    narrow = enumerate_ball(regular_group, 6.0, slack)
    wide = enumerate_ball(regular_group, 6.0, 2.0 * slack)
    assert narrow.fingerprint_set() == wide.fingerprint_set()


def test_default_slack_matches_conservative_slack(regular_group):
    """The circumradius slack finds the same ball as the 2·delta0 + 1 slack."""
    from hyperbolic.ballenum import enumerate_ball

    default = enumerate_ball(regular_group, 3.0)
    conservative = enumerate_ball(regular_group, 3.0, regular_group.conservative_slack)
    assert default.slack < conservative.slack
    assert default.fingerprint_set() == conservative.fingerprint_set()


def test_restrict_matches_direct_enumeration(regular_group):
    from hyperbolic.ballenum import enumerate_ball

    big = enumerate_ball(regular_group, 6.0)
    assert big.restrict(4.5).fingerprint_set() == enumerate_ball(regular_group, 4.5).fingerprint_set()


def test_index_of_finds_generators(regular_group):
    from hyperbolic.ballenum import enumerate_ball

    ball = enumerate_ball(regular_group, 4.0)
    for label, g in regular_group.generators.items():
        index = ball.index_of(g)
        assert index is not None
        assert ball.words[index] == (label,)


def test_growth_slope_near_one(regular_group):
    """Ball counts grow like e^R in the hyperbolic plane."""
    from hyperbolic.ballenum import growth_profile

    profile = growth_profile(regular_group, [8.0, 9.0, 10.0, 11.0, 12.0])
    assert list(profile.table["count"]) == sorted(profile.table["count"])
    assert 0.8 <= profile.log_slope <= 1.2, f"log-count slope {profile.log_slope}"


def test_budget_exceeded_keeps_exact_partial(regular_group):
    from errors import BudgetExceededError
    from hyperbolic.ballenum import enumerate_ball

    with pytest.raises(BudgetExceededError) as info:
        enumerate_ball(regular_group, 8.0, budget=200)
    err = info.value
    assert err.completed_radius < 8.0
    assert err.partial.fingerprint_set() == enumerate_ball(regular_group, err.completed_radius).fingerprint_set()


def test_negative_radius_rejected(regular_group):
    from errors import DegenerateInputError
    from hyperbolic.ballenum import enumerate_ball

    with pytest.raises(DegenerateInputError):
        enumerate_ball(regular_group, -1.0)


def test_word_ball_depths(regular_group):
    from hyperbolic.ballenum import enumerate_word_ball

    assert len(enumerate_word_ball(regular_group, 0)) == 1
    assert len(enumerate_word_ball(regular_group, 1)) == 9


def test_free_reduce_and_inverse():
    from hyperbolic.ballenum import free_reduce, inverse_word

    assert free_reduce(("a1", "b1", "B1", "A1", "a2")) == ("a2",)
    assert inverse_word(("a1", "B2")) == ("b2", "A1")


def test_dehn_reduces_relator_and_conjugates(regular_group):
    from hyperbolic.ballenum import dehn_reduce

    relator = regular_group.relator
    assert dehn_reduce(relator, relator) == ()
    assert dehn_reduce(relator[3:] + relator[:3], relator) == ()
    assert dehn_reduce(("b1",) + relator + ("B1",), relator) == ()
    assert dehn_reduce(("a1", "b2"), relator) == ("a1", "b2")


def test_dehn_cross_check_clean(regular_group):
    from hyperbolic.ballenum import dehn_cross_check, enumerate_ball

    assert dehn_cross_check(regular_group, enumerate_ball(regular_group, 5.0)) == 0
