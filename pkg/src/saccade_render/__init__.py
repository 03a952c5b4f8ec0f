"""Saccade-contingent rendering: acuity schedules, saccade detection, bitrate
simulation and the image filters used to emulate reduced render resolution."""

__version__ = "0.1.0"

from .acuity import (AcuityCurve, SchedulerParams, StepSchedule, acuity_cpd,  # noqa: E402
                     scheduled_cpd, step_schedule_cpd, time_to_reach)
from .bitrate import DisplaySpec, SimConfig, frame_bit_fraction, savings_for_rate, sweep  # noqa: E402
from .detect import (OnlineDetector, OnlineDetectorConfig, detect_saccades_offline,  # noqa: E402
                     main_sequence_stats, online_detector_step, smoothed_velocity)
from .gaze import GazeSample, GazeTrace, SaccadeEvent  # noqa: E402
from .imaging import (ImageBuffer, butterworth_lowpass, gaussian_downsample_upsample,  # noqa: E402
                      radial_power_spectrum)
from .sequence import render_trial_sequence  # noqa: E402
from .synth import SaccadeProfile, SynthConfig, generate_trace, saccade_waveform  # noqa: E402
