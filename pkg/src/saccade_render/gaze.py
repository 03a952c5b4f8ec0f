"""Gaze traces, saccade events and their CSV / JSON representations."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

TRACE_HEADER = ("t_ms", "x_deg", "y_deg", "valid")


@dataclass(frozen=True)
class GazeSample:
    t: float
    x: float
    y: float
    valid: bool = True


@dataclass(frozen=True)
class SaccadeEvent:
    onset: float
    offset: float
    amplitude: float
    peak_velocity: float
    direction: float

    def __post_init__(self):
        if not self.offset > self.onset:
            raise ValueError(f"offset {self.offset} must follow onset {self.onset}")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if not self.peak_velocity > 0:
            raise ValueError("peak_velocity must be > 0")

    @property
    def duration(self) -> float:
        return self.offset - self.onset

    def shifted(self, dt: float) -> "SaccadeEvent":
        return SaccadeEvent(self.onset + dt, self.offset + dt, self.amplitude,
                            self.peak_velocity, self.direction)


class GazeTrace:
    """Column-oriented gaze recording.

    Positions are in degrees of visual angle, timestamps in ms. Invalid samples
    (blinks, tracker loss) keep whatever position the tracker reported; nothing
    downstream reads them without first interpolating or splitting.
    """

    def __init__(self, t, x, y, valid=None, sample_rate: float | None = None):
        self.t = np.ascontiguousarray(t, dtype=np.float64)
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.float64)
        n = self.t.shape[0]
        if valid is None:
            valid = np.ones(n, dtype=bool)
        self.valid = np.ascontiguousarray(valid, dtype=bool)
        if not (self.x.shape == self.y.shape == self.valid.shape == (n,)):
            raise ValueError("t, x, y and valid must be 1-D arrays of equal length")
        if n > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        measured = self._measured_rate()
        if sample_rate is None:
            sample_rate = measured if measured is not None else 1000.0
        elif measured is not None and abs(measured - sample_rate) > 0.1 * sample_rate:
            raise ValueError(
                f"median sample interval implies {measured:.1f} Hz, "
                f"inconsistent with sample_rate={sample_rate} Hz"
            )
        self.sample_rate = float(sample_rate)

    def _measured_rate(self):
        if self.t.shape[0] < 2:
            return None
        return 1000.0 / float(np.median(np.diff(self.t)))

    def __len__(self):
        return self.t.shape[0]

    def __getitem__(self, i) -> GazeSample:
        return GazeSample(float(self.t[i]), float(self.x[i]), float(self.y[i]),
                          bool(self.valid[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __repr__(self):
        span = (self.t[-1] - self.t[0]) if len(self) else 0.0
        return f"GazeTrace(n={len(self)}, span={span:.0f} ms, rate={self.sample_rate:g} Hz)"

    @classmethod
    def from_samples(cls, samples, sample_rate=None) -> "GazeTrace":
        samples = list(samples)
        return cls([s.t for s in samples], [s.x for s in samples], [s.y for s in samples],
                   [s.valid for s in samples], sample_rate=sample_rate)

    def slice(self, start: int, stop: int) -> "GazeTrace":
        return GazeTrace(self.t[start:stop], self.x[start:stop], self.y[start:stop],
                         self.valid[start:stop], sample_rate=self.sample_rate)

    def translated(self, dx: float, dy: float) -> "GazeTrace":
        return GazeTrace(self.t, self.x + dx, self.y + dy, self.valid, self.sample_rate)

    def time_shifted(self, dt: float) -> "GazeTrace":
        return GazeTrace(self.t + dt, self.x, self.y, self.valid, self.sample_rate)


def read_trace_csv(path, sample_rate: float | None = None) -> GazeTrace:
    """Read a ``t_ms,x_deg,y_deg,valid`` CSV. ``valid`` accepts 1/0/true/false."""
    t, x, y, valid = [], [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(TRACE_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing column(s) {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                t.append(float(row["t_ms"]))
                flag = row["valid"].strip().lower()
                if flag not in {"1", "0", "true", "false"}:
                    raise ValueError(f"bad valid flag {row['valid']!r}")
                ok = flag in {"1", "true"}
                xv = float(row["x_deg"]) if row["x_deg"].strip() else math.nan
                yv = float(row["y_deg"]) if row["y_deg"].strip() else math.nan
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            x.append(xv)
            y.append(yv)
            valid.append(ok and math.isfinite(xv) and math.isfinite(yv))
    return GazeTrace(t, x, y, valid, sample_rate=sample_rate)


def write_trace_csv(trace: GazeTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for t, x, y, ok in zip(trace.t, trace.x, trace.y, trace.valid):
            # 9 significant digits keep sub-0.01 deg drift steps intact
            w.writerow((f"{t:.10g}", f"{x:.9g}", f"{y:.9g}", int(ok)))


def round_sig(v, digits: int = 6):
    """Round floats (recursively) to ``digits`` significant digits for stable output."""
    if isinstance(v, float):
        if not math.isfinite(v):
            return None
        return float(f"{v:.{digits}g}")
    if isinstance(v, dict):
        return {k: round_sig(val, digits) for k, val in v.items()}
    if isinstance(v, (list, tuple)):
        return [round_sig(val, digits) for val in v]
    if isinstance(v, np.generic):
        return round_sig(v.item(), digits)
    return v


def events_to_json(events) -> str:
    payload = [round_sig(asdict(e)) for e in events]
    return json.dumps(payload, indent=2) + "\n"


def events_from_json(text: str) -> list[SaccadeEvent]:
    return [SaccadeEvent(**item) for item in json.loads(text)]


def write_events_json(events, path) -> None:
    Path(path).write_text(events_to_json(events))


def read_events_json(path) -> list[SaccadeEvent]:
    return events_from_json(Path(path).read_text())
