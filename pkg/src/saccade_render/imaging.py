"""Image buffers, raster I/O and the two resolution-reduction filters.

Pixel data are linear-light floats in [0, 1] laid out ``(height, width,
channels)``. Every buffer carries its angular sampling density (``ppd``) so
that cutoffs given in cycles per degree map onto cycles per pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy import ndimage

from . import kernels

# Experiment-2 display: 2160 rows spanning 33.1 deg vertically
DEFAULT_STIMULUS_PPD = 2160 / 33.1


@dataclass
class ImageBuffer:
    data: np.ndarray
    ppd: float

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise ValueError(f"expected (H, W, 1|3) pixel data, got shape {data.shape}")
        if not self.ppd > 0:
            raise ValueError("ppd must be > 0")
        self.data = data
        self.ppd = float(self.ppd)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def nyquist_cpd(self) -> float:
        return self.ppd / 2.0

    def copy(self) -> "ImageBuffer":
        return ImageBuffer(self.data.copy(), self.ppd)

    def with_data(self, data) -> "ImageBuffer":
        return ImageBuffer(data, self.ppd)


# --------------------------------------------------------------------------
# I/O (8-bit sRGB on disk, linear floats in memory)


def srgb_to_linear(v):
    v = np.asarray(v, dtype=np.float64)
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(v):
    v = np.clip(np.asarray(v, dtype=np.float64), 0.0, 1.0)
    return np.where(v <= 0.0031308, v * 12.92, 1.055 * v ** (1 / 2.4) - 0.055)


def load_image(path, ppd: float = DEFAULT_STIMULUS_PPD, linear: bool = True) -> ImageBuffer:
    """Read PNG / PPM / PGM (anything Pillow opens) into a float buffer."""
    from PIL import Image

    with Image.open(path) as im:
        if im.mode.startswith("I;16") or im.mode == "I":
            arr = np.asarray(im, dtype=np.float64) / 65535.0
        elif im.mode in ("1", "L", "LA"):
            arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    if linear:
        arr = srgb_to_linear(arr)
    return ImageBuffer(arr, ppd)


def save_image(img: ImageBuffer, path, linear: bool = True) -> None:
    """Write 8-bit output; the format follows the file suffix (.png, .ppm, .pgm)."""
    from PIL import Image

    data = linear_to_srgb(img.data) if linear else np.clip(img.data, 0.0, 1.0)
    u8 = np.round(data * 255.0).astype(np.uint8)
    if img.channels == 1:
        pil = Image.fromarray(u8[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(u8, mode="RGB")
    pil.save(path)


# --------------------------------------------------------------------------
# frequency grids


def radial_frequency_cpd(height: int, width: int, ppd: float, real: bool = False):
    fy = sfft.fftfreq(height)[:, None]
    fx = (sfft.rfftfreq(width) if real else sfft.fftfreq(width))[None, :]
    return np.hypot(fy, fx) * ppd


def butterworth_gain(f_cpd, cutoff: float, order: int):
    return 1.0 / np.sqrt(1.0 + (np.asarray(f_cpd) / cutoff) ** (2 * order))


# --------------------------------------------------------------------------
# Butterworth lowpass


def butterworth_lowpass(img: ImageBuffer, cutoff: float, order: int = 5,
                        padding: str = "periodic", clamp: bool = True) -> ImageBuffer:
    """Radial Butterworth lowpass applied in the Fourier domain, channel by channel.

    ``padding="periodic"`` filters the image as is (implicitly tiled);
    ``"mirror"`` filters a symmetric extension and crops, which avoids
    wrap-around bleeding between opposite edges.
    """
    if not 0 < cutoff <= img.nyquist_cpd:
        raise ValueError(
            f"cutoff {cutoff} cpd outside (0, {img.nyquist_cpd:g}] for a {img.ppd:g} ppd image"
        )
    if int(order) != order or order < 1:
        raise ValueError("order must be a positive integer")
    if padding not in ("periodic", "mirror"):
        raise ValueError("padding must be 'periodic' or 'mirror'")
    data = img.data
    h, w = img.height, img.width
    if padding == "mirror":
        data = np.pad(data, ((h // 2, h - h // 2), (w // 2, w - w // 2), (0, 0)), mode="symmetric")
    ph, pw = data.shape[:2]
    gain = butterworth_gain(radial_frequency_cpd(ph, pw, img.ppd, real=True), cutoff, int(order))
    spec = sfft.rfft2(data, axes=(0, 1))
    out = sfft.irfft2(spec * gain[:, :, None], s=(ph, pw), axes=(0, 1))
    if padding == "mirror":
        out = out[h // 2:h // 2 + h, w // 2:w // 2 + w]
    if clamp:
        out = np.clip(out, 0.0, 1.0)
    return img.with_data(out)


# --------------------------------------------------------------------------
# Gaussian prefilter -> downsample -> bilinear upsample


def gaussian_downsample_upsample(img: ImageBuffer, target_ppd: float,
                                 max_downsample_factor: float = 8.0,
                                 sigma_scale: float = 0.5) -> ImageBuffer:
    """Emulate rendering at ``target_ppd`` and scaling back up to the source grid.

    The source is blurred with a Gaussian of ``sigma_scale * ratio`` source
    pixels, resampled to the coarse grid, then bilinearly upsampled to the
    original size.
    """
    if not 0 < target_ppd <= img.ppd * (1 + 1e-12):
        raise ValueError(f"target_ppd {target_ppd} must lie in (0, {img.ppd:g}]")
    ratio = img.ppd / target_ppd
    if ratio > max_downsample_factor * (1 + 1e-12):
        raise ValueError(
            f"target_ppd {target_ppd:g} needs {ratio:.3g}x downsampling; "
            f"limit is {max_downsample_factor:g}x"
        )
    if abs(ratio - 1.0) < 1e-12:
        return img.copy()
    h, w = img.height, img.width
    lo_h, lo_w = max(1, int(round(h / ratio))), max(1, int(round(w / ratio)))
    sigma = sigma_scale * ratio
    out = np.empty_like(img.data)
    for c in range(img.channels):
        plane = ndimage.gaussian_filter(img.data[:, :, c], sigma, mode="reflect")
        low = kernels.bilinear_resample(np.ascontiguousarray(plane), lo_h, lo_w)
        out[:, :, c] = kernels.bilinear_resample(low, h, w)
    return img.with_data(out)


# --------------------------------------------------------------------------
# radial power spectrum


@dataclass
class RadialSpectrum:
    frequencies: np.ndarray  # bin centres, cpd
    power: np.ndarray  # mean power per bin
    counts: np.ndarray  # FFT samples per bin
    slope: float  # d log(power) / d log(f) over the fit band
    intercept: float
    fit_band: tuple[float, float]  # cpd


def _region_pixels(img: ImageBuffer, region):
    if region is None:
        return 0, img.height, 0, img.width
    cx, cy, rw, rh = (float(v) for v in region)
    x0 = int(round((cx - rw / 2) * img.ppd))
    x1 = int(round((cx + rw / 2) * img.ppd))
    y0 = int(round((cy - rh / 2) * img.ppd))
    y1 = int(round((cy + rh / 2) * img.ppd))
    if x0 < 0 or y0 < 0 or x1 > img.width or y1 > img.height:
        raise ValueError(f"region {region} (deg) falls outside the image")
    return y0, y1, x0, x1


def luminance(img: ImageBuffer) -> np.ndarray:
    if img.channels == 1:
        return img.data[:, :, 0]
    return img.data @ np.array([0.2126, 0.7152, 0.0722])


def radial_power_spectrum(img: ImageBuffer, region=None, n_bins: int = 32,
                          fit_band=(0.1, 0.8)) -> RadialSpectrum:
    """Annularly averaged power spectrum of the image luminance.

    ``region`` is ``(center_x, center_y, width, height)`` in degrees from the
    top-left corner. The patch is mean-subtracted and Hann-windowed; bins are
    log-spaced from the fundamental to Nyquist. ``fit_band`` gives the slope-fit
    band as fractions of the Nyquist frequency.
    """
    y0, y1, x0, x1 = _region_pixels(img, region)
    patch = luminance(img)[y0:y1, x0:x1]
    h, w = patch.shape
    if h < 32 or w < 32:
        raise ValueError(f"region is {w}x{h} px; need at least 32x32")
    patch = patch - patch.mean()
    window = np.outer(np.hanning(h), np.hanning(w))
    spec = sfft.fft2(patch * window)
    power = (spec.real**2 + spec.imag**2) / np.sum(window**2)
    radius = np.ascontiguousarray(radial_frequency_cpd(h, w, img.ppd))
    nyq = img.nyquist_cpd
    f_min = img.ppd / min(h, w)
    edges = np.geomspace(f_min, nyq, n_bins + 1)
    means, counts = kernels.radial_bin_means(radius, np.ascontiguousarray(power), edges)
    centres = np.sqrt(edges[:-1] * edges[1:])
    keep = counts > 0
    freqs, means, counts = centres[keep], means[keep], counts[keep]
    lo, hi = fit_band[0] * nyq, fit_band[1] * nyq
    sel = (freqs >= lo) & (freqs <= hi) & (means > 0)
    if sel.sum() >= 2:
        slope, intercept = np.polyfit(np.log(freqs[sel]), np.log(means[sel]), 1)
    else:
        slope, intercept = np.nan, np.nan
    return RadialSpectrum(freqs, means, counts, float(slope), float(intercept), (lo, hi))


# --------------------------------------------------------------------------
# synthetic test images


def grating(height: int, width: int, cycles: float, angle_deg: float = 0.0,
            mean: float = 0.5, amplitude: float = 0.25, phase: float = 0.0) -> np.ndarray:
    """Sinusoid with ``cycles`` periods across the image width (for angle 0)."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    a = np.radians(angle_deg)
    u = (xx * np.cos(a) + yy * np.sin(a)) / width
    return mean + amplitude * np.sin(2 * np.pi * cycles * u + phase)


def checkerboard(height: int, width: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
    return np.where(np.indices((height, width)).sum(axis=0) % 2 == 0, high, low).astype(np.float64)


def power_law_noise(height: int, width: int, exponent: float = 2.0, seed: int = 0,
                    mean: float = 0.5, std: float = 0.15) -> np.ndarray:
    """Random-phase field whose power falls as ``1/f**exponent``."""
    rng = np.random.default_rng(seed)
    f = np.hypot(sfft.fftfreq(height)[:, None], sfft.fftfreq(width)[None, :])
    f[0, 0] = np.inf
    amp = f ** (-exponent / 2.0)
    phase = np.exp(2j * np.pi * rng.random((height, width)))
    field = sfft.ifft2(amp * phase).real
    field = (field - field.mean()) / field.std()
    return mean + std * field
