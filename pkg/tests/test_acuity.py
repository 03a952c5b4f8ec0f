import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saccade_render.acuity import (STEP_CUTOFFS_CPD, AcuityCurve, SchedulerParams,
                                   StepSchedule, acuity_cpd, scheduled_cpd,
                                   step_schedule_cpd, time_to_reach)

# Frozen from a 40-digit mpmath evaluation of 1.9469 * t**0.3475 + 9.5062.
ACUITY_500 = 26.380886827304671
ACUITY_200 = 21.779223579680985
# Frozen from 200-step bisection of the curve in mpmath (see _bisect below).
REACH_21_1 = 169.77616409458830
REACH_15 = 19.791873486534845


def _bisect(target, curve=AcuityCurve(), lo=0.0, hi=1e5, steps=200):
    """Independent inverse: bisection on the monotone curve in high precision."""
    mpmath.mp.dps = 40
    c, e, o = (mpmath.mpf(str(v)) for v in (curve.coefficient, curve.exponent, curve.offset))
    lo, hi, target = mpmath.mpf(lo), mpmath.mpf(hi), mpmath.mpf(str(target))
    for _ in range(steps):
        mid = (lo + hi) / 2
        if c * mid**e + o < target:
            lo = mid
        else:
            hi = mid
    return float(lo)


def test_acuity_at_landing_is_offset():
    assert acuity_cpd(0) == 9.5062


@pytest.mark.parametrize("t,expected", [(500, ACUITY_500), (200, ACUITY_200)])
def test_acuity_matches_high_precision_oracle(t, expected):
    assert acuity_cpd(t) == pytest.approx(expected, rel=1e-12)


def test_acuity_vectorised():
    t = np.array([0.0, 200.0, 500.0])
    np.testing.assert_allclose(acuity_cpd(t), [9.5062, ACUITY_200, ACUITY_500], rtol=1e-12)


def test_acuity_rejects_negative_time():
    with pytest.raises(ValueError):
        acuity_cpd(-1.0)


@pytest.mark.parametrize("kwargs", [
    {"coefficient": 0.0}, {"exponent": 1.0}, {"exponent": 0.0}, {"offset": -1.0},
])
def test_curve_invariants_enforced(kwargs):
    with pytest.raises(ValueError):
        AcuityCurve(**kwargs)


@pytest.mark.parametrize("target,expected", [(21.1, REACH_21_1), (15.0, REACH_15)])
def test_time_to_reach_matches_bisection(target, expected):
    assert _bisect(target) == pytest.approx(expected, rel=1e-10)
    assert time_to_reach(target) == pytest.approx(expected, rel=1e-9)


def test_time_to_reach_at_or_below_offset_is_zero():
    assert time_to_reach(9.5062) == 0.0
    assert time_to_reach(3.0) == 0.0


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1.0, max_value=10_000.0))
def test_time_to_reach_inverts_curve(t):
    assert time_to_reach(acuity_cpd(t)) == pytest.approx(t, rel=1e-6)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 5000.0), st.floats(0.0, 5000.0))
def test_acuity_strictly_increasing(t1, t2):
    lo, hi = sorted((t1, t2))
    assert acuity_cpd(lo) <= acuity_cpd(hi)
    # below ~1e-3 ms apart the increment drops under float64 resolution at 9.5 cpd
    if hi - lo > 1e-3:
        assert acuity_cpd(lo) < acuity_cpd(hi)


def test_acuity_concave_on_grid():
    t = np.linspace(1.0, 5000.0, 2001)
    second = np.diff(acuity_cpd(t), 2)
    assert np.all(second < 0)


# -- ramped schedule --------------------------------------------------------


def test_scheduler_defaults():
    p = SchedulerParams()
    assert p.native_acuity == 45.0
    assert p.floor_cpd == 5.625
    assert p.floor_cpd < p.native_acuity


@pytest.mark.parametrize("t,s,expected", [
    (0.0, 0.0, 9.5062),
    (0.0, -12.0, 5.625),
    (500.0, 0.0, 45.0),
])
def test_scheduled_cpd_examples(t, s, expected):
    assert scheduled_cpd(t, SchedulerParams(acuity_offset_s=s)) == pytest.approx(expected, abs=1e-12)


def test_scheduled_cpd_capped_at_native():
    t = np.arange(0.0, 3000.0)
    assert scheduled_cpd(t).max() == 45.0
    assert scheduled_cpd(2000.0, SchedulerParams(acuity_offset_s=40.0)) == 45.0


@settings(max_examples=150, deadline=None)
@given(st.floats(0.0, 3000.0), st.floats(-20.0, 20.0))
def test_scheduled_within_floor_and_native(t, s):
    p = SchedulerParams(acuity_offset_s=s)
    v = scheduled_cpd(t, p)
    assert p.floor_cpd <= v <= p.native_acuity


@settings(max_examples=150, deadline=None)
@given(st.floats(0.0, 3000.0), st.floats(-20.0, 20.0), st.floats(0.0, 10.0))
def test_scheduled_monotone_in_offset(t, s, ds):
    assert scheduled_cpd(t, SchedulerParams(acuity_offset_s=s + ds)) >= \
        scheduled_cpd(t, SchedulerParams(acuity_offset_s=s))


def test_scheduled_equals_curve_where_curve_dominates():
    t = np.arange(0.0, 200.0)
    curve = acuity_cpd(t)
    ramp = t * 45 / 500
    dom = (curve > ramp) & (curve > 5.625) & (curve < 45)
    assert dom.all()
    np.testing.assert_array_equal(scheduled_cpd(t), curve)


# -- step schedule ----------------------------------------------------------


@pytest.mark.parametrize("t,cutoff,hold,expected", [
    (50.0, 21.1, 100.0, 21.1),
    (100.0, 21.1, 100.0, 45.0),
    (499.0, 7.8, 500.0, 7.8),
])
def test_step_schedule_examples(t, cutoff, hold, expected):
    assert step_schedule_cpd(t, StepSchedule(cutoff, hold)) == expected


def test_step_schedule_invariants():
    with pytest.raises(ValueError):
        StepSchedule(21.1, 0.0)
    with pytest.raises(ValueError):
        StepSchedule(50.0, 100.0, post_hold_acuity=45.0)


def test_five_step_cutoffs_exposed():
    assert STEP_CUTOFFS_CPD == (7.8, 12.8, 16.4, 21.1, 27.1)
    assert all(c < 45.0 for c in STEP_CUTOFFS_CPD)


def test_21_1_cpd_reached_near_170_ms():
    # the 21.1 cpd / <=200 ms step conditions sit just around this crossing
    assert 150 < time_to_reach(21.1) < 200
    assert math.isclose(acuity_cpd(time_to_reach(21.1)), 21.1, rel_tol=1e-12)
