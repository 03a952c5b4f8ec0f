"""Display bandwidth model for saccade-contingent rendering.

After every saccade landing the renderer drops to the resolution the acuity
curve allows, returning to native once the curve crosses the display's Nyquist
limit or ``revert_after`` ms have passed. Savings are reported as the fraction
of native-resolution bits that never have to be produced.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .acuity import AcuityCurve, acuity_cpd


@dataclass(frozen=True)
class DisplaySpec:
    ppd: float
    refresh: float = 90.0
    bits_per_pixel: int = 32
    width: int = 3840
    height: int = 2160

    def __post_init__(self):
        for name in ("ppd", "refresh", "bits_per_pixel", "width", "height"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def nyquist_cpd(self) -> float:
        return self.ppd / 2.0

    @property
    def frame_ms(self) -> float:
        return 1000.0 / self.refresh

    @property
    def native_bits_per_second(self) -> float:
        return float(self.width) * self.height * self.bits_per_pixel * self.refresh


@dataclass(frozen=True)
class SimConfig:
    saccade_freq: float = 4.0  # Hz
    revert_after: float = 333.0  # ms
    curve: AcuityCurve = field(default_factory=AcuityCurve)
    distribution: str = "periodic"  # or "random"
    seed: int = 0
    n_saccades: int = 500  # intervals drawn for the random distribution
    # random gaps ~ U((1-jitter)/f, (1+jitter)/f); wider jitter pushes 3 Hz gaps past
    # the 333 ms revert point and the random and periodic runs drift apart
    jitter: float = 0.1
    quantize: bool = False  # round rendered frame sizes to whole pixels

    def __post_init__(self):
        if not self.saccade_freq > 0:
            raise ValueError("saccade_freq must be > 0")
        if self.revert_after < 0:
            raise ValueError("revert_after must be >= 0")
        if self.distribution not in ("periodic", "random"):
            raise ValueError("distribution must be 'periodic' or 'random'")
        if not 0 <= self.jitter < 1:
            raise ValueError("jitter must lie in [0, 1)")
        if self.n_saccades < 1:
            raise ValueError("n_saccades must be >= 1")


def frame_bit_fraction(render_cpd, display: DisplaySpec, quantize: bool = False):
    """Bits of a frame rendered at ``render_cpd`` relative to a native frame.

    Pixel count scales with the square of linear resolution, and a render
    target at or above the display's Nyquist limit costs a full frame.
    """
    cpd = np.asarray(render_cpd, dtype=np.float64)
    if np.any(cpd <= 0):
        raise ValueError("render_cpd must be > 0")
    ratio = np.minimum(2.0 * cpd / display.ppd, 1.0)
    if quantize:
        out = (np.round(display.width * ratio) * np.round(display.height * ratio)
               / (display.width * display.height))
    else:
        out = ratio * ratio
    return float(out) if out.ndim == 0 else out


def inter_saccade_gaps(sim: SimConfig) -> np.ndarray:
    period = 1000.0 / sim.saccade_freq
    if sim.distribution == "periodic":
        return np.array([period])
    rng = np.random.default_rng(sim.seed)
    return rng.uniform((1 - sim.jitter) * period, (1 + sim.jitter) * period, sim.n_saccades)


def savings_for_gaps(gaps_ms, display: DisplaySpec, sim: SimConfig) -> float:
    gaps = np.ascontiguousarray(gaps_ms, dtype=np.float64)
    c = sim.curve
    bits, weight = kernels.interval_bit_sums(
        gaps, display.frame_ms, float(display.ppd), float(sim.revert_after),
        c.coefficient, c.exponent, c.offset,
        float(display.width), float(display.height), bool(sim.quantize),
    )
    if weight == 0:
        return 0.0
    return max(0.0, 1.0 - bits / weight)


def savings_for_rate(display: DisplaySpec, sim: SimConfig) -> float:
    """Fraction of native bits saved at ``sim.saccade_freq`` saccades per second.

    Frames are sampled at their midpoints ``(k + 0.5) / refresh`` after each
    landing; the trailing partial frame of an interval counts pro rata.
    """
    return savings_for_gaps(inter_saccade_gaps(sim), display, sim)


def instantaneous_savings(t_ms, display: DisplaySpec, curve: AcuityCurve = AcuityCurve(),
                          revert_after: float = 333.0):
    """Per-frame savings ``t_ms`` after landing (no averaging over intervals)."""
    t = np.asarray(t_ms, dtype=np.float64)
    frac = frame_bit_fraction(np.minimum(acuity_cpd(t, curve), display.nyquist_cpd), display)
    return np.where(t < revert_after, 1.0 - np.asarray(frac), 0.0)


@dataclass(frozen=True)
class BitrateReport:
    savings: float
    native_bits_per_second: float
    rendered_bits_per_second: float


def bitrate_report(display: DisplaySpec, sim: SimConfig) -> BitrateReport:
    s = savings_for_rate(display, sim)
    native = display.native_bits_per_second
    return BitrateReport(s, native, native * (1.0 - s))


@dataclass
class SavingsGrid:
    ppd: np.ndarray
    freq: np.ndarray
    savings: np.ndarray  # shape (len(ppd), len(freq))

    def at(self, ppd: float, freq: float) -> float:
        i = int(np.flatnonzero(np.isclose(self.ppd, ppd))[0])
        j = int(np.flatnonzero(np.isclose(self.freq, freq))[0])
        return float(self.savings[i, j])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["ppd"] + [f"{f:.6g}" for f in self.freq])
            for p, row in zip(self.ppd, self.savings):
                w.writerow([f"{p:.6g}"] + [f"{v:.6g}" for v in row])

    @classmethod
    def from_csv(cls, path) -> "SavingsGrid":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        freq = np.array([float(v) for v in rows[0][1:]])
        ppd = np.array([float(r[0]) for r in rows[1:]])
        savings = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
        return cls(ppd, freq, savings)


def inclusive_range(lo: float, hi: float, step: float = 1.0) -> np.ndarray:
    if step <= 0:
        raise ValueError("step must be > 0")
    if hi < lo:
        raise ValueError(f"empty range {lo}..{hi}")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def sweep(ppd_values, freq_values, sim: SimConfig = SimConfig(),
          display: DisplaySpec = DisplaySpec(ppd=60.0)) -> SavingsGrid:
    """Savings over a ppd x saccade-frequency grid; other display fields from ``display``."""
    ppd = np.asarray(ppd_values, dtype=np.float64)
    freq = np.asarray(freq_values, dtype=np.float64)
    if ppd.size == 0 or freq.size == 0:
        raise ValueError("ppd and frequency ranges must be non-empty")
    out = np.empty((ppd.size, freq.size))
    for i, p in enumerate(ppd):
        disp = replace(display, ppd=float(p))
        for j, f in enumerate(freq):
            out[i, j] = savings_for_rate(disp, replace(sim, saccade_freq=float(f)))
    return SavingsGrid(ppd, freq, out)
