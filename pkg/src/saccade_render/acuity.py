"""Post-saccadic acuity curve and the render-resolution schedules built on it.

Time is always milliseconds since saccade landing; spatial frequency is in
cycles per degree (cpd).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Lowpass cutoffs (cpd) and hold durations (ms) of the step-schedule study.
# Only four cutoffs appear in the main text; 27.1 comes from the stimulus notes.
STEP_CUTOFFS_CPD = (7.8, 12.8, 16.4, 21.1, 27.1)
STEP_HOLDS_MS = (100.0, 200.0, 500.0)


@dataclass(frozen=True)
class AcuityCurve:
    """Power-law fit ``coefficient * t**exponent + offset`` (cpd, t in ms)."""

    coefficient: float = 1.9469
    exponent: float = 0.3475
    offset: float = 9.5062

    def __post_init__(self):
        if not self.coefficient > 0:
            raise ValueError(f"coefficient must be > 0, got {self.coefficient}")
        if not 0 < self.exponent < 1:
            raise ValueError(f"exponent must lie in (0, 1), got {self.exponent}")
        if not self.offset > 0:
            raise ValueError(f"offset must be > 0, got {self.offset}")

    def __call__(self, t):
        return acuity_cpd(t, self)


@dataclass(frozen=True)
class SchedulerParams:
    """Knobs of the in-headset schedule: offset, linear ramp and downsample floor."""

    acuity_offset_s: float = 0.0
    native_ppd: float = 90.0
    ramp_end: float = 500.0
    max_downsample_factor: float = 8.0

    def __post_init__(self):
        if not self.native_ppd > 0:
            raise ValueError("native_ppd must be > 0")
        if not self.ramp_end > 0:
            raise ValueError("ramp_end must be > 0")
        if not self.max_downsample_factor > 1:
            raise ValueError("max_downsample_factor must be > 1")

    @property
    def native_acuity(self) -> float:
        return self.native_ppd / 2.0

    @property
    def floor_cpd(self) -> float:
        return self.native_ppd / (self.max_downsample_factor * 2.0)


@dataclass(frozen=True)
class StepSchedule:
    cutoff: float
    hold_duration: float
    post_hold_acuity: float = 45.0

    def __post_init__(self):
        if not self.hold_duration > 0:
            raise ValueError("hold_duration must be > 0")
        if not 0 < self.cutoff <= self.post_hold_acuity:
            raise ValueError(
                f"cutoff {self.cutoff} must be in (0, post_hold_acuity={self.post_hold_acuity}]"
            )


def _check_time(t):
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("post-saccadic time must be >= 0 ms")
    return arr


def _scalar_or_array(arr):
    return float(arr) if arr.ndim == 0 else arr


def acuity_cpd(t, curve: AcuityCurve = AcuityCurve()):
    """Highest resolvable spatial frequency ``t`` ms after landing.

    Accepts a scalar or an array and returns the same shape.
    """
    arr = _check_time(t)
    return _scalar_or_array(curve.coefficient * arr**curve.exponent + curve.offset)


def time_to_reach(cpd_target: float, curve: AcuityCurve = AcuityCurve()) -> float:
    """Post-landing time (ms) at which the curve first reaches ``cpd_target``.

    Targets at or below the curve's t=0 value are already met on landing and
    yield ``0.0``; that is a regular result, not an error.
    """
    if np.isnan(cpd_target):
        raise ValueError("cpd_target is NaN")
    excess = cpd_target - curve.offset
    if excess <= 0:
        return 0.0
    return float((excess / curve.coefficient) ** (1.0 / curve.exponent))


def scheduled_cpd(t, params: SchedulerParams = SchedulerParams(),
                  curve: AcuityCurve = AcuityCurve()):
    """Render target (cpd) of the ramped, floored and offset schedule.

    The max of (curve + offset, linear ramp, downsample floor), capped at the
    native acuity so the ramp stops once native resolution is reached.
    """
    arr = _check_time(t)
    curve_term = curve.coefficient * arr**curve.exponent + curve.offset + params.acuity_offset_s
    ramp = arr * params.native_acuity / params.ramp_end
    out = np.maximum(np.maximum(curve_term, ramp), params.floor_cpd)
    return _scalar_or_array(np.minimum(out, params.native_acuity))


def step_schedule_cpd(t, sched: StepSchedule):
    """Cutoff during the hold window ``[0, hold_duration)``, native afterwards."""
    arr = _check_time(t)
    return _scalar_or_array(np.where(arr < sched.hold_duration, sched.cutoff,
                                     sched.post_hold_acuity))
