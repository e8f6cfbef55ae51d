"""Fast-time, slow-time and coarse angular FFT processing."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .errors import BadLength, NonUniformSubarray
from .geometry import POSITION_TOL
from .waveform import SPEED_OF_LIGHT

DB_FLOOR = -120.0

_WINDOW_ALIASES = {"rect": "boxcar", "rectangular": "boxcar", "none": "boxcar", "hanning": "hann"}


def make_window(name, n):
    """Periodic (DFT-even) window of length ``n``; ``"rect"`` means none."""
    return get_window(_WINDOW_ALIASES.get(name, name), n, fftbins=True)


def _fft_length(n, n_fft):
    if n_fft is None:
        n_fft = n
    if n_fft < n or n_fft & (n_fft - 1):
        raise BadLength(f"n_fft={n_fft} must be a power of two >= input length {n}")
    return n_fft


def to_db(power, floor=DB_FLOOR):
    """Power to dB relative to its maximum, clipped at ``floor``.

    An all-zero input maps to ``floor`` everywhere.
    """
    p = np.asarray(power, float)
    peak = p.max() if p.size else 0.0
    if peak <= 0:
        return np.full(p.shape, floor)
    with np.errstate(divide="ignore"):
        db = 10 * np.log10(p / peak)
    return np.maximum(db, floor)


def interpolate_peak(values, k):
    """Fractional offset of the parabola through ``values[k-1:k+2]``."""
    if k <= 0 or k >= len(values) - 1:
        return 0.0
    a, b, c = values[k - 1], values[k], values[k + 1]
    denom = a - 2 * b + c
    return 0.0 if denom == 0 else 0.5 * (a - c) / denom


@dataclass(frozen=True)
class RangeProfile:
    bins: np.ndarray
    bin_width: float
    window: str

    @property
    def ranges(self):
        return np.arange(self.bins.shape[-1]) * self.bin_width

    def peak_bin(self):
        return int(np.argmax(np.abs(self.bins)))

    def peak_range(self):
        """Range of the strongest bin, refined by a parabola on the dB magnitude."""
        mag = np.abs(self.bins)
        k = int(np.argmax(mag))
        with np.errstate(divide="ignore"):
            db = 20 * np.log10(np.maximum(mag, np.finfo(float).tiny))
        return (k + interpolate_peak(db, k)) * self.bin_width


def range_fft(samples, cfg, window="hann", n_fft=None):
    """Windowed, zero-padded DFT along the last (fast-time) axis.

    Bin ``k`` corresponds to IF frequency ``k f_s / n_fft`` and range
    ``k f_s c / (2 S n_fft)``.

    Raises:
        BadLength: ``n_fft`` is shorter than the input or not a power of two.
    """
    x = np.asarray(samples)
    n = x.shape[-1]
    n_fft = _fft_length(n, n_fft)
    w = make_window(window, n)
    bins = np.fft.fft(x * w, n=n_fft, axis=-1)
    bin_width = cfg.sample_rate * SPEED_OF_LIGHT / (2 * cfg.sweep_slope * n_fft)
    return RangeProfile(bins, bin_width, window)


@dataclass(frozen=True)
class DopplerSpectrum:
    bins: np.ndarray
    bin_width: float
    window: str

    @property
    def velocities(self):
        """Signed velocity of each bin (unshifted FFT order)."""
        n = self.bins.shape[-1]
        return np.fft.fftfreq(n, d=1.0 / n) * self.bin_width

    def peak_bin(self):
        return int(np.argmax(np.abs(self.bins)))


def doppler_fft(series, cfg, window="hann", n_fft=None):
    """Windowed DFT across chirps (last axis). Bin width is the velocity resolution."""
    x = np.asarray(series)
    n = x.shape[-1]
    n_fft = _fft_length(n, n_fft)
    w = make_window(window, n)
    bins = np.fft.fft(x * w, n=n_fft, axis=-1)
    bin_width = cfg.wavelength / (2 * n_fft * cfg.chirp_duration)
    return DopplerSpectrum(bins, bin_width, window)


def range_bin_of(range_m, cfg, n_fft=None):
    n_fft = n_fft or cfg.samples_per_chirp
    width = cfg.sample_rate * SPEED_OF_LIGHT / (2 * cfg.sweep_slope * n_fft)
    return int(round(range_m / width))


def range_gate(cube, cfg, range_m, elements=None, window="hann", n_fft=None):
    """Per-chirp array snapshots at the range bin nearest ``range_m``.

    Returns:
        ``(V, N_c)`` complex matrix; column ``n`` is the snapshot of chirp ``n``.
    """
    s = cube.samples if elements is None else cube.samples[:, np.asarray(elements), :]
    prof = range_fft(s, cfg, window, n_fft)
    k = range_bin_of(range_m, cfg, prof.bins.shape[-1])
    return prof.bins[:, :, k].T.copy()


def doppler_peak_snapshot(snapshots, cfg, window="hann"):
    """Single array snapshot at the strongest Doppler bin of range-gated data.

    ``snapshots`` is ``(V, N_c)`` as returned by :func:`range_gate`. The
    Doppler FFT integrates the frame coherently; the bin with the largest
    power summed over elements is returned as a ``(V,)`` vector.
    """
    spec = doppler_fft(snapshots, cfg, window)
    k = int(np.argmax(np.sum(np.abs(spec.bins) ** 2, axis=0)))
    return spec.bins[:, k].copy()


@dataclass(frozen=True)
class RangeAzimuthMap:
    """Power in dB (0 dB at the map maximum) over ``ranges x angles``."""

    power: np.ndarray
    ranges: np.ndarray
    angles: np.ndarray

    def peak(self):
        i, j = np.unravel_index(np.argmax(self.power), self.power.shape)
        return float(self.ranges[i]), float(self.angles[j])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["range_m\\angle_deg"] + [f"{a:.6f}" for a in self.angles])
        for r, row in zip(self.ranges, self.power):
            w.writerow([f"{r:.6f}"] + [f"{v:.4f}" for v in row])
        return buf.getvalue()

    def to_json(self):
        return json.dumps({
            "ranges_m": [round(float(r), 6) for r in self.ranges],
            "angles_deg": [round(float(a), 6) for a in self.angles],
            "power_db": [[round(float(v), 4) for v in row] for row in self.power],
        })


def range_azimuth_map(cube, ula, cfg, n_fft_r=None, n_fft_a=None,
                      range_window="hann", angle_window="rect", max_range_bins=None):
    """Range FFT per element, then a spatial FFT across a uniform subarray.

    Power is averaged over chirps. Spatial bin ``k`` of an ``N``-point FFT
    maps to ``sin(theta) = 2 k / (N d)`` with ``d`` the element spacing in
    half-wavelengths; bins with ``|sin(theta)| > 1`` are dropped.

    Args:
        cube: Data cube whose element axis is indexed by ``ula.indices``.
        ula: Uniform :class:`~mimo_doa.geometry.Subarray`.
        cfg: Waveform configuration.
        n_fft_r: Range FFT length (default ``N_s``).
        n_fft_a: Angle FFT length (default 4x the subarray size, rounded
            up to a power of two).
        max_range_bins: Keep only this many leading range bins (default: all).

    Raises:
        NonUniformSubarray: element spacing varies by more than the position
            tolerance.
    """
    if not ula.is_uniform(POSITION_TOL):
        raise NonUniformSubarray(f"subarray spacing varies: {np.unique(ula.spacing)}")
    d = float(ula.spacing[0])
    x = cube.samples[:, np.asarray(ula.indices), :]
    prof = range_fft(x, cfg, range_window, n_fft_r)
    rb = prof.bins  # [chirp, element, range]
    if n_fft_a is None:
        n_fft_a = 1 << int(np.ceil(np.log2(4 * ula.size)))
    n_fft_a = _fft_length(ula.size, n_fft_a)
    wa = make_window(angle_window, ula.size)
    spec = np.fft.fft(rb * wa[None, :, None], n=n_fft_a, axis=1)
    spec = np.fft.fftshift(spec, axes=1)
    power = np.mean(np.abs(spec) ** 2, axis=0).T  # [range, angle]

    sin_t = 2 * np.fft.fftshift(np.fft.fftfreq(n_fft_a)) / d
    keep = np.abs(sin_t) <= 1
    angles = np.degrees(np.arcsin(sin_t[keep]))
    power = power[:, keep]
    ranges = prof.ranges
    if max_range_bins is not None:
        power = power[:max_range_bins]
        ranges = ranges[:max_range_bins]
    return RangeAzimuthMap(to_db(power), ranges, angles)
