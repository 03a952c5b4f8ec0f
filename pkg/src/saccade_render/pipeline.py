"""End-to-end emulation: gaze trace -> saccades -> per-frame resolution -> bits."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from .acuity import AcuityCurve, SchedulerParams, scheduled_cpd
from .bitrate import DisplaySpec, SavingsGrid, SimConfig, frame_bit_fraction, inclusive_range, sweep
from .detect import detect_saccades_offline
from .gaze import GazeTrace, SaccadeEvent, round_sig
from .imaging import ImageBuffer
from .sequence import FramePlan, apply_plan

MAX_LATENCY_MS = 50.0


@dataclass(frozen=True)
class ScheduleStart:
    saccade: int
    onset: float
    landing: float
    latency: float

    @property
    def start(self) -> float:
        return self.landing + self.latency


@dataclass(frozen=True)
class PipelineFrame:
    index: int
    t: float
    saccade: int | None
    t_post: float | None
    render_cpd: float
    bit_fraction: float


@dataclass
class PipelinePlan:
    display: DisplaySpec
    params: SchedulerParams
    events: list[SaccadeEvent]
    starts: list[ScheduleStart]
    frames: list[PipelineFrame]

    @property
    def savings(self) -> float:
        if not self.frames:
            return 0.0
        return 1.0 - float(np.mean([f.bit_fraction for f in self.frames]))

    def manifest(self) -> dict:
        return round_sig({
            "display": asdict(self.display),
            "scheduler": asdict(self.params),
            "saccades": [
                {"index": s.saccade, "onset_ms": s.onset, "landing_ms": s.landing,
                 "latency_ms": s.latency, "schedule_start_ms": s.start}
                for s in self.starts
            ],
            "frames": [
                {"index": f.index, "t_ms": f.t, "saccade": f.saccade, "t_post_ms": f.t_post,
                 "render_cpd": f.render_cpd, "bit_fraction": f.bit_fraction}
                for f in self.frames
            ],
            "savings": self.savings,
        })


def schedule_starts(events, latency_ms: float = 0.0, jitter_ms: float = 0.0,
                    seed: int = 0) -> list[ScheduleStart]:
    """Landing times delayed by eye-to-photon latency (plus optional uniform jitter).

    Total delay is capped at the 50 ms worst case measured on the headset.
    """
    if latency_ms < 0 or jitter_ms < 0:
        raise ValueError("latency and jitter must be >= 0")
    if latency_ms > MAX_LATENCY_MS:
        raise ValueError(f"latency {latency_ms} ms exceeds the {MAX_LATENCY_MS:g} ms maximum")
    rng = np.random.default_rng(seed)
    out = []
    for i, ev in enumerate(events):
        lat = latency_ms
        if jitter_ms > 0:
            lat = min(latency_ms + rng.uniform(0.0, jitter_ms), MAX_LATENCY_MS)
        out.append(ScheduleStart(i, ev.onset, ev.offset, lat))
    return out


def plan_pipeline(trace: GazeTrace, display: DisplaySpec,
                  params: SchedulerParams = SchedulerParams(),
                  curve: AcuityCurve = AcuityCurve(), latency_ms: float = 0.0,
                  jitter_ms: float = 0.0, seed: int = 0, events=None,
                  **detect_kwargs) -> PipelinePlan:
    """Frame-by-frame render targets for ``trace`` shown on ``display``.

    Frames tick at the display refresh across the trace; each one follows the
    schedule of the most recent saccade whose (latency-delayed) start has
    passed. The scheduler's native resolution is taken from ``display``.
    """
    if events is None:
        events = detect_saccades_offline(trace, **detect_kwargs) if len(trace) else []
    params = replace(params, native_ppd=float(display.ppd))
    starts = sorted(schedule_starts(events, latency_ms, jitter_ms, seed), key=lambda s: s.start)
    frames = []
    if len(trace):
        t0, t1 = float(trace.t[0]), float(trace.t[-1])
        n = int(np.floor((t1 - t0) / display.frame_ms))
        times = t0 + (np.arange(n) + 0.5) * display.frame_ms
        start_times = np.array([s.start for s in starts])
        for k, ft in enumerate(times):
            j = int(np.searchsorted(start_times, ft, side="right")) - 1
            if j < 0:
                frames.append(PipelineFrame(k, float(ft), None, None, display.nyquist_cpd, 1.0))
                continue
            t_post = float(ft - start_times[j])
            cpd = float(scheduled_cpd(t_post, params, curve))
            frames.append(PipelineFrame(k, float(ft), starts[j].saccade, t_post, cpd,
                                        float(frame_bit_fraction(cpd, display))))
    return PipelinePlan(display, params, list(events), starts, frames)


def render_pipeline_frames(img: ImageBuffer, plan: PipelinePlan):
    """Yield ``(frame, image)`` for every planned frame, reusing equal targets."""
    limit = max(plan.params.max_downsample_factor, img.ppd / (2.0 * plan.params.floor_cpd))
    cache = {}
    for f in plan.frames:
        if f.render_cpd >= plan.params.native_acuity or 2.0 * f.render_cpd >= img.ppd:
            fp = FramePlan(f.t, f.t_post, f.render_cpd, "none")
        else:
            fp = FramePlan(f.t, f.t_post, f.render_cpd, "resample", 2.0 * f.render_cpd)
        key = (fp.filter, round(f.render_cpd, 9) if fp.filter != "none" else None)
        if key not in cache:
            cache[key] = apply_plan(img, fp, max_downsample_factor=limit)
        yield f, cache[key]


def reproduce_fig3(ppd_range=(30.0, 100.0, 1.0), freq_range=(1.0, 8.0, 1.0),
                   sim: SimConfig = SimConfig(), display: DisplaySpec = DisplaySpec(ppd=60.0)):
    return sweep(inclusive_range(*ppd_range), inclusive_range(*freq_range), sim, display)


def fig3_curves_text(grid: SavingsGrid) -> str:
    """Gnuplot data: one ``index`` block per saccade frequency, columns ppd savings."""
    blocks = []
    for j, f in enumerate(grid.freq):
        lines = [f"# saccade_freq_hz {f:.6g}", "# ppd savings"]
        lines += [f"{p:.6g} {grid.savings[i, j]:.6g}" for i, p in enumerate(grid.ppd)]
        blocks.append("\n".join(lines))
    return "\n\n\n".join(blocks) + "\n"
