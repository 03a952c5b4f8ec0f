"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``moving_average``, ``threshold_runs``, ...) are bound at
import time to the numba version unless numba is missing or disabled through
``SACCADE_RENDER_DISABLE_NUMBA``. Both flavours stay importable under their
``*_nb`` / ``*_np`` names so tests and the benchmark can compare them.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import USE_NUMBA, maybe_njit

__all__ = [
    "moving_average",
    "threshold_runs",
    "interval_bit_sums",
    "radial_bin_means",
    "bilinear_resample",
    "BACKEND",
]


# --------------------------------------------------------------------------
# centred boxcar with undefined (NaN) edges


def moving_average_np(a, window):
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    out = np.full(n, np.nan)
    if window < 1 or n < window:
        return out
    bad = ~np.isfinite(a)
    csum = np.concatenate(([0.0], np.cumsum(np.where(bad, 0.0, a))))
    cbad = np.concatenate(([0], np.cumsum(bad)))
    half = window // 2
    idx = np.arange(half, n - window + half + 1)
    start = idx - half
    stop = start + window
    sums = csum[stop] - csum[start]
    nbad = cbad[stop] - cbad[start]
    out[idx] = np.where(nbad == 0, sums / window, np.nan)
    return out


@maybe_njit
def moving_average_nb(a, window):
    n = a.shape[0]
    out = np.empty(n)
    out[:] = np.nan
    if window < 1 or n < window:
        return out
    half = window // 2
    acc = 0.0
    nbad = 0
    for j in range(window):
        v = a[j]
        if math.isfinite(v):
            acc += v
        else:
            nbad += 1
    i = half
    while True:
        if nbad == 0:
            out[i] = acc / window
        start = i - half
        stop = start + window
        if stop >= n:
            break
        old = a[start]
        new = a[stop]
        if math.isfinite(old):
            acc -= old
        else:
            nbad -= 1
        if math.isfinite(new):
            acc += new
        else:
            nbad += 1
        i += 1
    return out


# --------------------------------------------------------------------------
# runs of True in a boolean mask -> (first, last) inclusive indices


def threshold_runs_np(mask):
    m = np.asarray(mask, dtype=np.int8)
    if m.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    d = np.diff(np.concatenate(([0], m, [0])))
    starts = np.flatnonzero(d == 1).astype(np.int64)
    stops = (np.flatnonzero(d == -1) - 1).astype(np.int64)
    return starts, stops


@maybe_njit
def threshold_runs_nb(mask):
    n = mask.shape[0]
    starts = np.empty(n, dtype=np.int64)
    stops = np.empty(n, dtype=np.int64)
    k = 0
    inside = False
    for i in range(n):
        if mask[i] and not inside:
            starts[k] = i
            inside = True
        elif not mask[i] and inside:
            stops[k] = i - 1
            k += 1
            inside = False
    if inside:
        stops[k] = n - 1
        k += 1
    return starts[:k].copy(), stops[:k].copy()


# --------------------------------------------------------------------------
# per-frame bit accounting over a sequence of inter-saccade intervals
#
# Each interval of length G ms holds G / frame_ms frames, the last one
# possibly partial and weighted by its fraction. A frame sampled at post-
# landing time t renders at min(curve(t), ppd/2) until revert_ms, then native.


def _frame_fraction_np(t, ppd, revert_ms, coef, expo, offset, width, height, quantize):
    cpd = np.minimum(coef * t**expo + offset, ppd / 2.0)
    ratio = np.minimum(2.0 * cpd / ppd, 1.0)
    if quantize:
        frac = np.round(width * ratio) * np.round(height * ratio) / (width * height)
    else:
        frac = ratio * ratio
    return np.where(t < revert_ms, frac, 1.0)


def interval_bit_sums_np(gaps_ms, frame_ms, ppd, revert_ms, coef, expo, offset,
                         width=3840, height=2160, quantize=False):
    gaps = np.asarray(gaps_ms, dtype=np.float64)
    if gaps.size == 0:
        return 0.0, 0.0
    nframes = gaps / frame_ms
    counts = np.ceil(nframes).astype(np.int64)
    total = int(counts.sum())
    # frame index within its own interval
    owner = np.repeat(np.arange(gaps.size), counts)
    first = np.cumsum(counts) - counts
    k = np.arange(total) - first[owner]
    weight = np.minimum(1.0, nframes[owner] - k)
    t = (k + 0.5) * frame_ms
    frac = _frame_fraction_np(t, ppd, revert_ms, coef, expo, offset, width, height, quantize)
    return float(np.sum(weight * frac)), float(np.sum(weight))


@maybe_njit
def interval_bit_sums_nb(gaps_ms, frame_ms, ppd, revert_ms, coef, expo, offset,
                         width=3840, height=2160, quantize=False):
    bits = 0.0
    weights = 0.0
    nyq = ppd / 2.0
    for g in range(gaps_ms.shape[0]):
        nframes = gaps_ms[g] / frame_ms
        count = int(math.ceil(nframes))
        for k in range(count):
            w = min(1.0, nframes - k)
            t = (k + 0.5) * frame_ms
            if t < revert_ms:
                cpd = min(coef * t**expo + offset, nyq)
                ratio = min(2.0 * cpd / ppd, 1.0)
                if quantize:
                    frac = (np.round(width * ratio) * np.round(height * ratio)
                            / (width * height))
                else:
                    frac = ratio * ratio
            else:
                frac = 1.0
            bits += w * frac
            weights += w
    return bits, weights


# --------------------------------------------------------------------------
# annular averaging for radial spectra


def radial_bin_means_np(radius, power, edges):
    r = np.ravel(radius)
    p = np.ravel(power)
    nb = edges.shape[0] - 1
    idx = np.searchsorted(edges, r, side="right") - 1
    keep = (idx >= 0) & (idx < nb) & (r < edges[-1])
    sums = np.bincount(idx[keep], weights=p[keep], minlength=nb)
    counts = np.bincount(idx[keep], minlength=nb)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return means, counts.astype(np.int64)


@maybe_njit
def radial_bin_means_nb(radius, power, edges):
    r = radius.ravel()
    p = power.ravel()
    nb = edges.shape[0] - 1
    sums = np.zeros(nb)
    counts = np.zeros(nb, dtype=np.int64)
    lo = edges[0]
    hi = edges[-1]
    for i in range(r.shape[0]):
        ri = r[i]
        if ri < lo or ri >= hi:
            continue
        j = np.searchsorted(edges, ri, side="right") - 1
        sums[j] += p[i]
        counts[j] += 1
    means = np.empty(nb)
    for j in range(nb):
        means[j] = sums[j] / counts[j] if counts[j] > 0 else np.nan
    return means, counts


# --------------------------------------------------------------------------
# pixel-centre aligned bilinear resampling of one 2-D plane, edges clamped


def _axis_taps(n_out, n_in):
    pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    i0 = np.floor(pos).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, pos - i0


def bilinear_resample_np(plane, out_h, out_w):
    plane = np.asarray(plane, dtype=np.float64)
    h, w = plane.shape
    y0, y1, wy = _axis_taps(out_h, h)
    x0, x1, wx = _axis_taps(out_w, w)
    wy = wy[:, None]
    top = plane[y0][:, x0] * (1.0 - wx) + plane[y0][:, x1] * wx
    bot = plane[y1][:, x0] * (1.0 - wx) + plane[y1][:, x1] * wx
    return top * (1.0 - wy) + bot * wy


@maybe_njit
def bilinear_resample_nb(plane, out_h, out_w):
    h, w = plane.shape
    out = np.empty((out_h, out_w))
    sy = h / out_h
    sx = w / out_w
    for i in range(out_h):
        py = min(max((i + 0.5) * sy - 0.5, 0.0), h - 1.0)
        y0 = int(math.floor(py))
        y1 = min(y0 + 1, h - 1)
        fy = py - y0
        for j in range(out_w):
            px = min(max((j + 0.5) * sx - 0.5, 0.0), w - 1.0)
            x0 = int(math.floor(px))
            x1 = min(x0 + 1, w - 1)
            fx = px - x0
            top = plane[y0, x0] * (1.0 - fx) + plane[y0, x1] * fx
            bot = plane[y1, x0] * (1.0 - fx) + plane[y1, x1] * fx
            out[i, j] = top * (1.0 - fy) + bot * fy
    return out


# --------------------------------------------------------------------------
# dispatch

if USE_NUMBA:
    BACKEND = "numba"
    moving_average = moving_average_nb
    threshold_runs = threshold_runs_nb
    interval_bit_sums = interval_bit_sums_nb
    radial_bin_means = radial_bin_means_nb
    bilinear_resample = bilinear_resample_nb
else:
    BACKEND = "numpy"
    moving_average = moving_average_np
    threshold_runs = threshold_runs_np
    interval_bit_sums = interval_bit_sums_np
    radial_bin_means = radial_bin_means_np
    bilinear_resample = bilinear_resample_np
