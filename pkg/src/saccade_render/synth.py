"""Synthetic gaze traces with known saccades, used as detector ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaze import GazeTrace, SaccadeEvent

# d/du of 10u^3 - 15u^4 + 6u^5 peaks at u = 0.5 with value 30/16
MIN_JERK_PEAK = 1.875


def minimum_jerk(u):
    u = np.clip(u, 0.0, 1.0)
    return u**3 * (10.0 - 15.0 * u + 6.0 * u * u)


WAVEFORMS = {"minimum_jerk": (minimum_jerk, MIN_JERK_PEAK)}


@dataclass(frozen=True)
class SaccadeProfile:
    amplitude: float  # deg
    duration: float  # ms
    direction: float = 0.0  # deg CCW from +x
    waveform: str = "minimum_jerk"

    def __post_init__(self):
        if self.waveform not in WAVEFORMS:
            raise ValueError(f"unknown waveform {self.waveform!r}; have {sorted(WAVEFORMS)}")
        if not 0 < self.duration < 100:
            raise ValueError("saccade duration must lie in (0, 100) ms")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")

    @property
    def peak_velocity(self) -> float:
        """Analytic peak speed in deg/s."""
        return WAVEFORMS[self.waveform][1] * self.amplitude / self.duration * 1000.0


def saccade_waveform(profile: SaccadeProfile, t_frac):
    """Fraction of the amplitude covered at normalised time ``t_frac`` in [0, 1]."""
    arr = np.asarray(t_frac, dtype=np.float64)
    if np.any((arr < 0) | (arr > 1)):
        raise ValueError("t_frac must lie in [0, 1]")
    out = WAVEFORMS[profile.waveform][0](arr)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SynthConfig:
    duration: float = 10_000.0  # ms
    sample_rate: float = 1000.0  # Hz
    saccade_rate: float = 4.0  # Hz
    amplitude_range: tuple[float, float] = (4.0, 15.0)  # deg
    drift_sigma: float = 0.05  # deg per sample, random-walk step
    seed: int = 0
    # saccade duration = base + slope * amplitude; 12 deg -> 40 ms
    duration_base_ms: float = 16.0
    duration_slope_ms_per_deg: float = 2.0
    jitter: float = 0.25  # onset jitter as a fraction of the mean interval
    waveform: str = "minimum_jerk"

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if self.saccade_rate < 0:
            raise ValueError("saccade_rate must be >= 0")
        lo, hi = self.amplitude_range
        if not 0 <= lo <= hi:
            raise ValueError("amplitude_range must satisfy 0 <= low <= high")
        if not 0 <= self.jitter < 0.5:
            raise ValueError("jitter must lie in [0, 0.5)")
        if self.drift_sigma < 0:
            raise ValueError("drift_sigma must be >= 0")
        if self.saccade_rate > 0:
            longest = self.saccade_duration(hi)
            period = 1000.0 / self.saccade_rate
            if self.saccade_rate * longest / 1000.0 >= 1 or period * (1 - 2 * self.jitter) <= longest:
                raise ValueError(
                    f"{self.saccade_rate} Hz saccades of up to {longest:.0f} ms cannot fit "
                    "between landings; lower the rate, jitter or amplitude range"
                )
            SaccadeProfile(hi, longest, 0.0, self.waveform)

    def saccade_duration(self, amplitude: float) -> float:
        return self.duration_base_ms + self.duration_slope_ms_per_deg * amplitude


def generate_trace(config: SynthConfig):
    """Return ``(trace, truth)`` where ``truth`` lists the injected saccades.

    Onsets sit at the middle of consecutive ``1/saccade_rate`` slots, each
    jittered uniformly by up to ``jitter`` of a slot; a saccade that would run
    past the end of the trace is not injected. Fixational drift is a Gaussian
    random walk added on top.
    """
    rng = np.random.default_rng(config.seed)
    n = int(round(config.duration * config.sample_rate / 1000.0))
    t = np.arange(n) * (1000.0 / config.sample_rate)
    x = np.cumsum(rng.normal(0.0, config.drift_sigma, n))
    y = np.cumsum(rng.normal(0.0, config.drift_sigma, n))
    # drift starts at the origin
    if n:
        x -= x[0]
        y -= y[0]
    truth = []
    if config.saccade_rate > 0:
        period = 1000.0 / config.saccade_rate
        lo, hi = config.amplitude_range
        end = t[-1] if n else 0.0
        k = 0
        while True:
            onset = (k + 0.5 + rng.uniform(-config.jitter, config.jitter)) * period
            amp = rng.uniform(lo, hi)
            direction = rng.uniform(0.0, 360.0)
            dur = config.saccade_duration(amp)
            if onset + dur > end:
                break
            profile = SaccadeProfile(amp, dur, direction, config.waveform)
            frac = WAVEFORMS[config.waveform][0]((t - onset) / dur)
            rad = math.radians(direction)
            x += amp * math.cos(rad) * frac
            y += amp * math.sin(rad) * frac
            truth.append(SaccadeEvent(onset, onset + dur, amp, profile.peak_velocity, direction))
            k += 1
    return GazeTrace(t, x, y, sample_rate=config.sample_rate), truth


def single_saccade_trace(amplitude: float = 12.0, direction: float = 0.0,
                         onset: float = 300.0, duration: float | None = None,
                         total: float = 800.0, sample_rate: float = 1000.0,
                         drift_sigma: float = 0.0, seed: int = 0,
                         duration_base_ms: float = 16.0, duration_slope_ms_per_deg: float = 2.0):
    """One saccade from the origin, for golden-path and online/offline checks."""
    if duration is None:
        duration = duration_base_ms + duration_slope_ms_per_deg * amplitude
    profile = SaccadeProfile(amplitude, duration, direction)
    rng = np.random.default_rng(seed)
    n = int(round(total * sample_rate / 1000.0))
    t = np.arange(n) * (1000.0 / sample_rate)
    frac = minimum_jerk((t - onset) / duration)
    rad = math.radians(direction)
    x = amplitude * math.cos(rad) * frac
    y = amplitude * math.sin(rad) * frac
    if drift_sigma > 0:
        x = x + np.cumsum(rng.normal(0.0, drift_sigma, n))
        y = y + np.cumsum(rng.normal(0.0, drift_sigma, n))
    event = SaccadeEvent(onset, onset + duration, amplitude, profile.peak_velocity, direction)
    return GazeTrace(t, x, y, sample_rate=sample_rate), event
