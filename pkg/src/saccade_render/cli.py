"""Command-line front end: ``saccade-render <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .acuity import StepSchedule
from .bitrate import DisplaySpec, SimConfig, inclusive_range, sweep
from .config import ConfigError, curve_from_config, read_config, scheduler_from_config
from .detect import OnlineDetector, OnlineDetectorConfig, detect_saccades_offline
from .gaze import events_to_json, read_trace_csv, round_sig, write_trace_csv
from .imaging import (DEFAULT_STIMULUS_PPD, butterworth_lowpass, load_image, save_image)
from .pipeline import fig3_curves_text, plan_pipeline, render_pipeline_frames, reproduce_fig3
from .sequence import plan_frames, render_trial_sequence
from .synth import SynthConfig, generate_trace

log = logging.getLogger("saccade_render")

OUT_DIR_ENV = "SACCADE_RENDER_OUT_DIR"


class Outputs:
    """Tracks files written by a subcommand and deletes them all if it fails."""

    def __init__(self, root: Path):
        self.root = root
        self.written: list[Path] = []
        self.made_dirs: list[Path] = []

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.root / p

    def _ensure_parent(self, path: Path):
        missing = []
        d = path.parent
        while not d.exists():
            missing.append(d)
            d = d.parent
        for d in reversed(missing):
            d.mkdir()
            self.made_dirs.append(d)

    def write_text(self, p, text: str) -> Path:
        path = self.path(p)
        self._ensure_parent(path)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
        self.written.append(path)
        return path

    def write_with(self, p, writer) -> Path:
        """``writer(tmp_path)`` produces the file; it is moved into place on success."""
        path = self.path(p)
        self._ensure_parent(path)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
        os.close(fd)
        try:
            writer(tmp)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        self.written.append(path)
        return path

    def rollback(self):
        for p in reversed(self.written):
            p.unlink(missing_ok=True)
        for d in reversed(self.made_dirs):
            try:
                d.rmdir()
            except OSError:
                pass


def _json(obj) -> str:
    return json.dumps(round_sig(obj), indent=2) + "\n"


# --------------------------------------------------------------------------
# subcommands


def cmd_detect(args, out: Outputs, cfg):
    trace = read_trace_csv(args.input)
    if args.mode == "offline":
        events = detect_saccades_offline(
            trace, sd_multiplier=args.sd_multiplier, min_duration=args.min_duration_ms,
            window=args.window, robust_sd=not args.plain_sd, merge_gap_ms=args.merge_gap_ms,
            max_gap_ms=args.max_gap_ms,
        )
        out.write_text(args.out, events_to_json(events))
        log.info("%d saccade(s) detected", len(events))
        return
    if args.target is None:
        raise ValueError("--mode online needs --target X Y")
    fixation = args.fixation
    if fixation is None:
        first = np.flatnonzero(trace.valid)
        if first.size == 0:
            raise ValueError("trace has no valid samples")
        fixation = (float(trace.x[first[0]]), float(trace.y[first[0]]))
    config = OnlineDetectorConfig(tuple(fixation), args.departure_radius,
                                  tuple(args.target), args.landing_radius)
    events = OnlineDetector(config, arm_time=args.arm_ms).run(trace)
    payload = [{"kind": e.kind, "t_ms": e.t, "x_deg": e.x, "y_deg": e.y} for e in events]
    out.write_text(args.out, _json(payload))
    log.info("online detector emitted %s", [e.kind for e in events] or "nothing")


def cmd_synth(args, out: Outputs, cfg):
    config = SynthConfig(
        duration=args.duration, sample_rate=args.sample_rate, saccade_rate=args.rate,
        amplitude_range=(args.amp_min, args.amp_max), drift_sigma=args.drift_sigma,
        seed=args.seed, jitter=args.jitter,
    )
    trace, truth = generate_trace(config)
    out.write_with(args.out, lambda p: write_trace_csv(trace, p))
    if args.truth:
        out.write_text(args.truth, events_to_json(truth))
    log.info("%d samples, %d injected saccade(s)", len(trace), len(truth))


def _sim_from_args(args, cfg) -> SimConfig:
    return SimConfig(revert_after=args.revert_ms, curve=curve_from_config(cfg),
                     distribution=args.distribution, seed=args.seed, quantize=args.quantize)


def cmd_bitrate(args, out: Outputs, cfg):
    display = DisplaySpec(ppd=args.ppd_min, refresh=args.refresh,
                          bits_per_pixel=args.bits_per_pixel, width=args.width, height=args.height)
    grid = sweep(inclusive_range(args.ppd_min, args.ppd_max, args.ppd_step),
                 inclusive_range(args.freq_min, args.freq_max, args.freq_step),
                 _sim_from_args(args, cfg), display)
    out.write_with(args.out, grid.to_csv)


def cmd_reproduce_fig3(args, out: Outputs, cfg):
    grid = reproduce_fig3(sim=_sim_from_args(args, cfg))
    out.write_with(Path(args.out_dir) / "fig3_grid.csv", grid.to_csv)
    out.write_text(Path(args.out_dir) / "fig3_curves.dat", fig3_curves_text(grid))


def cmd_filter(args, out: Outputs, cfg):
    img = load_image(args.input, ppd=args.ppd, linear=not args.no_linear)
    res = butterworth_lowpass(img, args.cutoff_cpd, order=args.order, padding=args.padding)
    out.write_with(args.out, lambda p: save_image(res, p, linear=not args.no_linear))


def _frame_times(duration_ms: float, refresh: float):
    frame_ms = 1000.0 / refresh
    n = int(np.floor(duration_ms / frame_ms + 1e-9))
    return [k * 1000.0 / refresh for k in range(n)]


def cmd_sequence(args, out: Outputs, cfg):
    img = load_image(args.input, ppd=args.ppd, linear=not args.no_linear)
    curve = curve_from_config(cfg)
    if args.mode == "step":
        schedule = StepSchedule(args.cutoff_cpd, args.hold_ms, post_hold_acuity=img.nyquist_cpd)
    else:
        params = scheduler_from_config(cfg)
        schedule = replace(params, acuity_offset_s=args.offset_cpd,
                           native_ppd=args.native_ppd or img.ppd)
    times = _frame_times(args.duration_ms, args.refresh)
    plans = plan_frames(schedule, 0.0, times, img.ppd, curve)
    frames = render_trial_sequence(img, schedule, 0.0, times, curve=curve, order=args.order)
    suffix = "." + args.format
    records = []
    for k, (plan, frame) in enumerate(zip(plans, frames)):
        name = f"frame_{k:04d}{suffix}"
        out.write_with(Path(args.out_dir) / name,
                       lambda p, fr=frame: save_image(fr, p, linear=not args.no_linear))
        records.append({"index": k, "t_ms": plan.t, "cpd": plan.cpd, "filter": plan.filter,
                        "file": name})
    sched = asdict(schedule)
    sched["kind"] = args.mode
    out.write_text(Path(args.out_dir) / "manifest.json",
                   _json({"image_ppd": img.ppd, "refresh_hz": args.refresh,
                          "schedule": sched, "frames": records}))


def cmd_pipeline(args, out: Outputs, cfg):
    trace = read_trace_csv(args.trace)
    display = DisplaySpec(ppd=args.ppd, refresh=args.refresh, bits_per_pixel=args.bits_per_pixel)
    params = replace(scheduler_from_config(cfg), acuity_offset_s=args.offset_cpd)
    img = None
    if not args.no_frames:
        if not args.image:
            raise ValueError("--image is required unless --no-frames is given")
        img = load_image(args.image, ppd=args.image_ppd or args.ppd, linear=not args.no_linear)
    plan = plan_pipeline(trace, display, params, curve_from_config(cfg),
                         latency_ms=args.latency_ms, jitter_ms=args.latency_jitter_ms,
                         seed=args.seed)
    manifest = plan.manifest()
    out_dir = Path(args.out_dir)
    if img is not None:
        for (frame, image), rec in zip(render_pipeline_frames(img, plan), manifest["frames"]):
            name = f"frames/frame_{frame.index:05d}.{args.format}"
            out.write_with(out_dir / name,
                           lambda p, im=image: save_image(im, p, linear=not args.no_linear))
            rec["file"] = name
    report = {
        "savings": plan.savings,
        "n_saccades": len(plan.events),
        "n_frames": len(plan.frames),
        "latency_ms": args.latency_ms,
        "native_bits_per_second": display.native_bits_per_second,
        "rendered_bits_per_second": display.native_bits_per_second * (1.0 - plan.savings),
    }
    out.write_text(out_dir / "manifest.json", _json(manifest))
    out.write_text(out_dir / "report.json", _json(report))
    log.info("%d saccade(s), %d frame(s), savings %.1f%%", len(plan.events),
             len(plan.frames), 100 * plan.savings)
    print(f"savings {plan.savings:.6g}")


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="saccade-render",
                                description="Saccade-contingent rendering toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="INI file with model parameters and option defaults")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-root", default=os.environ.get(OUT_DIR_ENV, "."),
                   help=f"base for relative output paths (env {OUT_DIR_ENV})")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)
    # --seed is also accepted after the subcommand name
    seed_opt = argparse.ArgumentParser(add_help=False)
    seed_opt.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    d = sub.add_parser("detect", parents=[seed_opt], help="detect saccades in a gaze CSV")
    d.add_argument("--input", required=True)
    d.add_argument("--mode", choices=("offline", "online"), default="offline")
    d.add_argument("--out", required=True)
    d.add_argument("--sd-multiplier", type=float, default=3.0)
    d.add_argument("--min-duration-ms", type=float, default=20.0)
    d.add_argument("--window", type=int, default=20)
    d.add_argument("--plain-sd", action="store_true", help="plain SD instead of MAD-based")
    d.add_argument("--merge-gap-ms", type=float, default=20.0)
    d.add_argument("--max-gap-ms", type=float, default=40.0)
    d.add_argument("--fixation", type=float, nargs=2, metavar=("X", "Y"))
    d.add_argument("--target", type=float, nargs=2, metavar=("X", "Y"))
    d.add_argument("--departure-radius", type=float, default=1.9)
    d.add_argument("--landing-radius", type=float, default=2.9)
    d.add_argument("--arm-ms", type=float, default=None,
                   help="stimulus onset; earlier departures abort (default: armed at start)")
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("synth", parents=[seed_opt], help="generate a synthetic gaze trace")
    s.add_argument("--duration", type=float, default=10_000.0, help="ms")
    s.add_argument("--rate", type=float, default=4.0, help="saccades per second")
    s.add_argument("--sample-rate", type=float, default=1000.0)
    s.add_argument("--amp-min", type=float, default=4.0)
    s.add_argument("--amp-max", type=float, default=15.0)
    s.add_argument("--drift-sigma", type=float, default=0.05)
    s.add_argument("--jitter", type=float, default=0.25)
    s.add_argument("--out", required=True)
    s.add_argument("--truth")
    s.set_defaults(func=cmd_synth)

    def sim_options(sp):
        sp.add_argument("--revert-ms", type=float, default=333.0)
        sp.add_argument("--distribution", choices=("periodic", "random"), default="periodic")
        sp.add_argument("--quantize", action="store_true",
                        help="round reduced frames to whole pixels")

    b = sub.add_parser("bitrate", parents=[seed_opt], help="savings grid over ppd x saccade frequency")
    b.add_argument("--ppd-min", type=float, default=30.0)
    b.add_argument("--ppd-max", type=float, default=100.0)
    b.add_argument("--ppd-step", type=float, default=1.0)
    b.add_argument("--freq-min", type=float, default=1.0)
    b.add_argument("--freq-max", type=float, default=8.0)
    b.add_argument("--freq-step", type=float, default=1.0)
    b.add_argument("--refresh", type=float, default=90.0)
    b.add_argument("--bits-per-pixel", type=int, default=32)
    b.add_argument("--width", type=int, default=3840)
    b.add_argument("--height", type=int, default=2160)
    sim_options(b)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bitrate)

    r = sub.add_parser("reproduce-fig3", parents=[seed_opt], help="default 30-100 ppd x 1-8 Hz sweep")
    sim_options(r)
    r.add_argument("--out-dir", default="fig3")
    r.set_defaults(func=cmd_reproduce_fig3)

    def image_options(sp, ppd_default):
        sp.add_argument("--in", dest="input", required=True)
        sp.add_argument("--ppd", type=float, default=ppd_default, help="image pixels per degree")
        sp.add_argument("--no-linear", action="store_true",
                        help="filter gamma-encoded values directly")

    f = sub.add_parser("filter", parents=[seed_opt], help="Butterworth lowpass an image")
    image_options(f, DEFAULT_STIMULUS_PPD)
    f.add_argument("--cutoff-cpd", type=float, required=True)
    f.add_argument("--order", type=int, default=5)
    f.add_argument("--padding", choices=("periodic", "mirror"), default="periodic")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_filter)

    q = sub.add_parser("sequence", parents=[seed_opt], help="render a post-saccadic frame sequence")
    image_options(q, DEFAULT_STIMULUS_PPD)
    q.add_argument("--mode", choices=("step", "ramp"), default="step")
    q.add_argument("--hold-ms", type=float, default=200.0)
    q.add_argument("--cutoff-cpd", type=float, default=21.1)
    q.add_argument("--offset-cpd", type=float, default=0.0, help="ramp mode acuity offset")
    q.add_argument("--native-ppd", type=float, default=None,
                   help="ramp mode display ppd (default: image ppd)")
    q.add_argument("--refresh", type=float, default=90.0)
    q.add_argument("--duration-ms", type=float, default=600.0)
    q.add_argument("--order", type=int, default=5)
    q.add_argument("--format", choices=("png", "ppm"), default="png")
    q.add_argument("--out-dir", required=True)
    q.set_defaults(func=cmd_sequence)

    e = sub.add_parser("pipeline", parents=[seed_opt], help="trace + image -> frame manifest and savings")
    e.add_argument("--trace", required=True)
    e.add_argument("--image")
    e.add_argument("--ppd", type=float, default=60.0, help="display ppd")
    e.add_argument("--image-ppd", type=float, default=None, help="default: display ppd")
    e.add_argument("--refresh", type=float, default=90.0)
    e.add_argument("--bits-per-pixel", type=int, default=32)
    e.add_argument("--offset-cpd", type=float, default=0.0)
    e.add_argument("--latency-ms", type=float, default=0.0)
    e.add_argument("--latency-jitter-ms", type=float, default=0.0)
    e.add_argument("--no-frames", action="store_true", help="skip rendering frame images")
    e.add_argument("--no-linear", action="store_true")
    e.add_argument("--format", choices=("png", "ppm"), default="png")
    e.add_argument("--out-dir", required=True)
    e.set_defaults(func=cmd_pipeline)
    return p


SUBCOMMANDS = ("detect", "synth", "bitrate", "reproduce-fig3", "filter", "sequence", "pipeline")


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def apply_config_defaults(parser, cfg) -> None:
    """Turn ``[global]`` and ``[<subcommand>]`` sections into parser defaults."""
    targets = {"global": parser, **_subparsers(parser)}
    for section, values in cfg.items():
        if section in ("acuity", "scheduler"):
            continue
        target = targets[section]
        actions = {a.dest: a for a in target._actions if a.dest not in ("help", "func")}
        defaults = {}
        for key, raw in values.items():
            dest = key.replace("-", "_")
            if dest not in actions or dest in ("config", "version"):
                raise ConfigError(f"[{section}]: unknown key {key!r}")
            action = actions[dest]
            if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                defaults[dest] = raw.strip().lower() in ("1", "true", "yes", "on")
            elif action.nargs == 2:
                defaults[dest] = [action.type(v) for v in raw.replace(",", " ").split()]
            else:
                conv = action.type or str
                defaults[dest] = conv(raw)
            if action.required:
                action.required = False
        target.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    cfg = {}
    try:
        if known.config:
            cfg = read_config(known.config, allowed_sections=("global",) + SUBCOMMANDS)
            apply_config_defaults(parser, cfg)
            # fail on bad model sections before any work is done
            curve_from_config(cfg)
            scheduler_from_config(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"saccade-render: config error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    out = Outputs(Path(args.out_root))
    try:
        args.func(args, out, cfg)
    except (OSError, ValueError, ConfigError) as exc:
        out.rollback()
        print(f"saccade-render {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except BaseException:
        out.rollback()
        raise
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
