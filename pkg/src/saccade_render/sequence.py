"""Per-frame rendering of a post-saccadic schedule onto a still image."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acuity import (AcuityCurve, SchedulerParams, StepSchedule, scheduled_cpd,
                     step_schedule_cpd)
from .imaging import ImageBuffer, butterworth_lowpass, gaussian_downsample_upsample


@dataclass(frozen=True)
class FramePlan:
    t: float  # frame time, ms
    t_post: float | None  # ms since landing; None before landing
    cpd: float | None  # schedule value; None before landing
    filter: str  # "none" | "butterworth" | "resample"
    target_ppd: float | None = None  # resample target for the resample filter


def schedule_value(schedule, t_post: float, curve: AcuityCurve = AcuityCurve()) -> float:
    if isinstance(schedule, StepSchedule):
        return step_schedule_cpd(t_post, schedule)
    if isinstance(schedule, SchedulerParams):
        return scheduled_cpd(t_post, schedule, curve)
    raise TypeError(f"unsupported schedule type {type(schedule).__name__}")


def plan_frames(schedule, landing: float, frame_times, image_ppd: float,
                curve: AcuityCurve = AcuityCurve()) -> list[FramePlan]:
    """Decide, frame by frame, which filter (if any) a frame needs.

    Step schedules map to the Fourier lowpass, ramp schedules to the
    downsample/upsample path. Frames before landing and frames whose target
    is at or above native acuity are left untouched.
    """
    times = np.asarray(frame_times, dtype=np.float64)
    if times.size > 1 and np.any(np.diff(times) < 0):
        raise ValueError("frame_times must be sorted")
    if isinstance(schedule, StepSchedule):
        native = min(schedule.post_hold_acuity, image_ppd / 2.0)
    elif isinstance(schedule, SchedulerParams):
        native = min(schedule.native_acuity, image_ppd / 2.0)
    else:
        raise TypeError(f"unsupported schedule type {type(schedule).__name__}")
    plans = []
    for ft in times:
        ft = float(ft)
        if ft < landing:
            plans.append(FramePlan(ft, None, None, "none"))
            continue
        t_post = ft - landing
        cpd = float(schedule_value(schedule, t_post, curve))
        if cpd >= native:
            plans.append(FramePlan(ft, t_post, cpd, "none"))
        elif isinstance(schedule, StepSchedule):
            plans.append(FramePlan(ft, t_post, cpd, "butterworth"))
        else:
            plans.append(FramePlan(ft, t_post, cpd, "resample", 2.0 * cpd))
    return plans


def apply_plan(img: ImageBuffer, plan: FramePlan, order: int = 5,
               max_downsample_factor: float | None = None) -> ImageBuffer:
    if plan.filter == "none":
        return img.copy()
    if plan.filter == "butterworth":
        return butterworth_lowpass(img, plan.cpd, order=order)
    limit = max_downsample_factor or img.ppd / plan.target_ppd
    return gaussian_downsample_upsample(img, plan.target_ppd, max_downsample_factor=limit)


def render_trial_sequence(img: ImageBuffer, schedule, landing: float, frame_times,
                          curve: AcuityCurve = AcuityCurve(),
                          order: int = 5) -> list[ImageBuffer]:
    """Filtered copy of ``img`` for every frame time (see ``plan_frames``).

    Frames with identical filter settings share one buffer, so a long hold
    costs a single filter pass; copy before mutating a frame.
    """
    plans = plan_frames(schedule, landing, frame_times, img.ppd, curve)
    limit = None
    if isinstance(schedule, SchedulerParams):
        # the floor is defined against the display, which may be coarser than img
        limit = max(schedule.max_downsample_factor, img.ppd / (2.0 * schedule.floor_cpd))
    cache = {}
    frames = []
    for plan in plans:
        key = (plan.filter, plan.cpd if plan.filter != "none" else None)
        if key not in cache:
            cache[key] = apply_plan(img, plan, order, limit)
        frames.append(cache[key])
    return frames
