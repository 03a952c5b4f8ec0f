"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

Each kernel is called once before timing so JIT compilation is excluded.
Results are checked for agreement before the timings are printed.
"""

import argparse
import timeit

import numpy as np

from saccade_render import kernels
from saccade_render._accel import NUMBA_AVAILABLE


def _cases(scale: float, rng):
    n_trace = int(600_000 * scale)
    trace = np.cumsum(rng.normal(0, 0.05, n_trace))
    vel = np.gradient(trace) * 1000.0
    mask = np.abs(vel) > 60.0
    gaps = rng.uniform(200.0, 300.0, int(20_000 * scale))
    side = max(32, int(512 * np.sqrt(scale)))
    radius = np.hypot(*np.meshgrid(np.fft.fftfreq(side), np.fft.fftfreq(side))) * 64.0
    power = rng.random((side, side))
    edges = np.geomspace(64.0 / side, 32.0, 33)
    plane = rng.random((side, side))
    return {
        "moving_average": ((vel, 20), lambda a, b: np.allclose(a, b, equal_nan=True)),
        "threshold_runs": ((mask,), lambda a, b: all(np.array_equal(x, y) for x, y in zip(a, b))),
        "interval_bit_sums": ((gaps, 1000.0 / 90.0, 60.0, 333.0, 1.9469, 0.3475, 9.5062,
                               3840.0, 2160.0, False), lambda a, b: np.allclose(a, b)),
        "radial_bin_means": ((radius, power, edges),
                             lambda a, b: np.allclose(a[0], b[0], equal_nan=True)
                             and np.array_equal(a[1], b[1])),
        "bilinear_resample": ((plane, side // 3, side // 3), np.allclose),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0, help="problem size multiplier")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if not NUMBA_AVAILABLE:
        print("numba is not importable; only the numpy path can run")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<20} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for name, (call_args, same) in _cases(args.scale, rng).items():
        f_np = getattr(kernels, f"{name}_np")
        f_nb = getattr(kernels, f"{name}_nb")
        r_np, r_nb = f_np(*call_args), f_nb(*call_args)  # warm-up / compile
        if not same(r_np, r_nb):
            raise SystemExit(f"{name}: numba and numpy results differ")
        t_np = min(timeit.repeat(lambda: f_np(*call_args), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: f_nb(*call_args), number=1, repeat=args.repeat))
        print(f"{name:<20} {1e3 * t_np:>10.3f} {1e3 * t_nb:>10.3f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
