"""Saccade detection: offline velocity thresholding and an online radius FSM."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .gaze import GazeSample, GazeTrace, SaccadeEvent

MAD_TO_SD = 1.4826


# --------------------------------------------------------------------------
# preprocessing


def valid_segments(trace: GazeTrace, max_gap_ms: float = 40.0):
    """Split ``trace`` at long invalid gaps and bridge the short ones.

    Returns ``(start, stop, x, y)`` tuples: sample index range into ``trace``
    plus positions with gaps of at most ``max_gap_ms`` (measured between the
    bracketing valid samples) linearly interpolated. Leading and trailing
    invalid samples are dropped.
    """
    good = np.flatnonzero(trace.valid)
    if good.size == 0:
        return []
    cuts = np.flatnonzero(np.diff(trace.t[good]) > max_gap_ms)
    firsts = np.concatenate(([0], cuts + 1))
    lasts = np.concatenate((cuts, [good.size - 1]))
    segments = []
    for a, b in zip(firsts, lasts):
        start, stop = int(good[a]), int(good[b]) + 1
        idx = good[a:b + 1]
        t = trace.t[start:stop]
        x = np.interp(t, trace.t[idx], trace.x[idx])
        y = np.interp(t, trace.t[idx], trace.y[idx])
        segments.append((start, stop, x, y))
    return segments


def _central_difference(t, v):
    out = np.full(v.shape[0], np.nan)
    if v.shape[0] >= 3:
        out[1:-1] = (v[2:] - v[:-2]) / (t[2:] - t[:-2]) * 1000.0
    return out


def smoothed_velocity_xy(trace: GazeTrace, window: int = 20, max_gap_ms: float = 40.0):
    """Boxcar-smoothed velocity components in deg/s (NaN where undefined)."""
    if window < 1:
        raise ValueError("window must be >= 1")
    if len(trace) <= window:
        raise ValueError(f"trace has {len(trace)} samples; need more than window={window}")
    vx = np.full(len(trace), np.nan)
    vy = np.full(len(trace), np.nan)
    for start, stop, x, y in valid_segments(trace, max_gap_ms):
        t = trace.t[start:stop]
        vx[start:stop] = kernels.moving_average(_central_difference(t, x), window)
        vy[start:stop] = kernels.moving_average(_central_difference(t, y), window)
    return vx, vy


def smoothed_velocity(trace: GazeTrace, window: int = 20, max_gap_ms: float = 40.0):
    """Per-sample gaze speed (deg/s).

    Central differences on the positions, a centred ``window``-sample boxcar on
    each velocity component, then the 2-D magnitude. Samples whose window runs
    off a segment edge are NaN.
    """
    vx, vy = smoothed_velocity_xy(trace, window, max_gap_ms)
    return np.hypot(vx, vy)


# --------------------------------------------------------------------------
# offline detection


def velocity_threshold(speed, sd_multiplier: float = 3.0, robust: bool = True) -> float:
    v = speed[np.isfinite(speed)]
    if v.size == 0:
        return math.inf
    med = float(np.median(v))
    sd = MAD_TO_SD * float(np.median(np.abs(v - med))) if robust else 0.0
    if sd <= 0:
        sd = float(np.std(v))
    return med + sd_multiplier * sd


def _merge_runs(t, starts, stops, merge_gap_ms):
    if starts.size == 0:
        return starts, stops
    keep_s, keep_e = [int(starts[0])], [int(stops[0])]
    for s, e in zip(starts[1:], stops[1:]):
        if t[s] - t[keep_e[-1]] < merge_gap_ms:
            keep_e[-1] = int(e)
        else:
            keep_s.append(int(s))
            keep_e.append(int(e))
    return np.array(keep_s), np.array(keep_e)


def detect_saccades_offline(trace: GazeTrace, sd_multiplier: float = 3.0,
                            min_duration: float = 20.0, window: int = 20,
                            robust_sd: bool = True, merge_gap_ms: float = 20.0,
                            max_gap_ms: float = 40.0) -> list[SaccadeEvent]:
    """Find saccades as supra-threshold runs of smoothed gaze speed.

    Threshold is median + ``sd_multiplier`` x SD of the speed, computed per
    valid segment; with ``robust_sd`` the SD comes from the median absolute
    deviation. Runs closer than ``merge_gap_ms`` are merged, and runs shorter
    than ``min_duration`` ms discarded. Degenerate traces give ``[]``.
    """
    if len(trace) <= window:
        return []
    vx, vy = smoothed_velocity_xy(trace, window, max_gap_ms)
    speed = np.hypot(vx, vy)
    events = []
    for start, stop, x, y in valid_segments(trace, max_gap_ms):
        seg_speed = speed[start:stop]
        t = trace.t[start:stop]
        thr = velocity_threshold(seg_speed, sd_multiplier, robust_sd)
        if not math.isfinite(thr):
            continue
        with np.errstate(invalid="ignore"):
            mask = np.ascontiguousarray(seg_speed > thr)
        starts, stops = kernels.threshold_runs(mask)
        starts, stops = _merge_runs(t, starts, stops, merge_gap_ms)
        for s, e in zip(starts, stops):
            if t[e] - t[s] < min_duration:
                continue
            dx, dy = x[e] - x[s], y[e] - y[s]
            events.append(SaccadeEvent(
                onset=float(t[s]),
                offset=float(t[e]),
                amplitude=float(math.hypot(dx, dy)),
                peak_velocity=float(np.nanmax(seg_speed[s:e + 1])),
                direction=float(math.degrees(math.atan2(dy, dx)) % 360.0),
            ))
    return events


# --------------------------------------------------------------------------
# online radius-criterion state machine


@dataclass(frozen=True)
class OnlineDetectorConfig:
    fixation_center: tuple[float, float] = (0.0, 0.0)
    departure_radius: float = 1.9
    target_center: tuple[float, float] = (0.0, 0.0)
    landing_radius: float = 2.9

    def __post_init__(self):
        if not (self.departure_radius > 0 and self.landing_radius > 0):
            raise ValueError("radii must be > 0")


@dataclass(frozen=True)
class OnlineState:
    phase: str = "fixating"  # fixating -> departed -> landed, or aborted
    armed: bool = False
    last_t: float | None = None


@dataclass(frozen=True)
class OnlineEvent:
    kind: str  # "departed" | "landed" | "aborted"
    t: float
    x: float
    y: float


def arm(state: OnlineState) -> OnlineState:
    """Mark stimulus onset; departures before this abort the trial."""
    return replace(state, armed=True)


def online_detector_step(state: OnlineState, sample: GazeSample,
                         config: OnlineDetectorConfig):
    """Advance the detector by one sample; returns ``(new_state, event_or_None)``."""
    if state.last_t is not None and sample.t <= state.last_t:
        raise ValueError(f"sample at t={sample.t} is not after t={state.last_t}")
    state = replace(state, last_t=sample.t)
    if not sample.valid or state.phase in ("landed", "aborted"):
        return state, None
    if state.phase == "fixating":
        fx, fy = config.fixation_center
        if math.hypot(sample.x - fx, sample.y - fy) > config.departure_radius:
            kind = "departed" if state.armed else "aborted"
            return replace(state, phase=kind), OnlineEvent(kind, sample.t, sample.x, sample.y)
        return state, None
    tx, ty = config.target_center
    if math.hypot(sample.x - tx, sample.y - ty) <= config.landing_radius:
        return replace(state, phase="landed"), OnlineEvent("landed", sample.t, sample.x, sample.y)
    return state, None


class OnlineDetector:
    """Stateful convenience wrapper; not safe to share between threads."""

    def __init__(self, config: OnlineDetectorConfig, arm_time: float | None = None):
        self.config = config
        self.arm_time = arm_time
        self.state = OnlineState(armed=arm_time is None)

    def arm(self):
        self.state = arm(self.state)

    def step(self, sample: GazeSample):
        if not self.state.armed and self.arm_time is not None and sample.t >= self.arm_time:
            self.arm()
        self.state, event = online_detector_step(self.state, sample, self.config)
        return event

    def run(self, trace: GazeTrace) -> list[OnlineEvent]:
        return [ev for ev in map(self.step, trace) if ev is not None]


# --------------------------------------------------------------------------
# main-sequence diagnostic


@dataclass(frozen=True)
class MainSequenceFit:
    slope: float  # (deg/s) per deg
    intercept: float  # deg/s
    n: int


def main_sequence_stats(events) -> MainSequenceFit:
    """Least-squares line of peak velocity against amplitude."""
    events = list(events)
    if len(events) < 2:
        raise ValueError("need at least 2 events for a main-sequence fit")
    amp = np.array([e.amplitude for e in events])
    vel = np.array([e.peak_velocity for e in events])
    if np.ptp(amp) == 0:
        raise ValueError("all events share one amplitude; slope undefined")
    slope, intercept = np.polyfit(amp, vel, 1)
    return MainSequenceFit(float(slope), float(intercept), len(events))
