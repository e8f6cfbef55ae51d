"""Angular spectra and peak picking."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from ..spectral import DB_FLOOR, to_db


@dataclass(frozen=True)
class AngularSpectrum:
    """Power over a direction grid, in dB with 0 dB at the maximum.

    An identically zero input (no signal at all) is stored as ``DB_FLOOR``
    everywhere, so it carries no peaks above any useful threshold.

    Attributes:
        grid: ``(K_g,)`` angles or ``(K_g, 2)`` (azimuth, elevation) pairs, deg.
        power_db: ``(K_g,)`` normalized power.
        estimator: Name of the producing estimator (informational).
    """

    grid: np.ndarray
    power_db: np.ndarray
    estimator: str = ""

    @classmethod
    def from_power(cls, grid, power, estimator=""):
        power = np.asarray(power, float)
        if not np.all(np.isfinite(power)):
            raise ValueError("spectrum power must be finite")
        return cls(np.asarray(grid, float), to_db(power), estimator)

    @property
    def is_2d(self):
        return self.grid.ndim == 2

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.is_2d:
            w.writerow(["azimuth_deg", "elevation_deg", "power_db"])
            for (az, el), p in zip(self.grid, self.power_db):
                w.writerow([f"{az:.6f}", f"{el:.6f}", f"{p:.6f}"])
        else:
            w.writerow(["angle_deg", "power_db"])
            for a, p in zip(self.grid, self.power_db):
                w.writerow([f"{a:.6f}", f"{p:.6f}"])
        return buf.getvalue()

    def to_dict(self):
        key = "angle_pairs_deg" if self.is_2d else "angle_deg"
        return {
            "estimator": self.estimator,
            key: np.round(self.grid, 6).tolist(),
            "power_db": np.round(self.power_db, 6).tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class PeakSet:
    """Peaks sorted by power, strongest first, all at or above ``threshold_db``."""

    angles: np.ndarray
    powers_db: np.ndarray
    threshold_db: float
    indices: np.ndarray = field(repr=False, default=None)

    def __len__(self):
        return len(self.powers_db)

    def to_dict(self):
        return {
            "threshold_db": self.threshold_db,
            "peaks": [{"angle_deg": np.round(a, 6).tolist(), "power_db": round(float(p), 6)}
                      for a, p in zip(self.angles, self.powers_db)],
        }


def _peaks_1d(p):
    """Indices of strict local maxima; a flat run counts once, at its left end.

    A run is a peak when no neighbour is higher and at least one neighbour
    exists and is lower, so the ends of the array qualify but a constant
    array does not.
    """
    n = len(p)
    out = []
    i = 0
    while i < n:
        j = i
        while j + 1 < n and p[j + 1] == p[i]:
            j += 1
        left = p[i - 1] if i > 0 else None
        right = p[j + 1] if j + 1 < n else None
        neighbours = [q for q in (left, right) if q is not None]
        if neighbours and all(q < p[i] for q in neighbours):
            out.append(i)
        i = j + 1
    return np.array(out, int)


def _mesh_shape(grid):
    """``(n_az, n_el)`` when a 2-D grid is a full raster (azimuth-major), else None."""
    az = np.unique(grid[:, 0])
    el = np.unique(grid[:, 1])
    if az.size * el.size != len(grid):
        return None
    expect = np.stack(np.meshgrid(az, el, indexing="ij"), axis=-1).reshape(-1, 2)
    return (az.size, el.size) if np.array_equal(expect, grid) else None


def _peaks_2d(p, shape):
    """Raster local maxima over the 8-neighbourhood; ties resolve to the earlier point."""
    P = p.reshape(shape)
    pad = np.pad(P, 1, constant_values=-np.inf)
    ok = np.ones(shape, bool)
    lower_seen = np.zeros(shape, bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            q = pad[1 + di:1 + di + shape[0], 1 + dj:1 + dj + shape[1]]
            earlier = di < 0 or (di == 0 and dj < 0)
            ok &= (P > q) if earlier else (P >= q)
            lower_seen |= np.isfinite(q) & (P > q)
    return np.flatnonzero(ok & lower_seen)


def find_peaks(spectrum, threshold_db=-6.0):
    """Local maxima of ``spectrum`` at or above ``threshold_db``.

    1-D grids use strict maxima with plateaus reported at their leftmost
    index and end points allowed. 2-D grids must form a full azimuth-major
    raster and use the 8-neighbourhood.
    """
    p = np.asarray(spectrum.power_db, float)
    if spectrum.is_2d:
        shape = _mesh_shape(spectrum.grid)
        if shape is None:
            raise ValueError("2-D peak search needs a full (azimuth, elevation) raster")
        idx = _peaks_2d(p, shape)
    else:
        idx = _peaks_1d(p)
    idx = idx[p[idx] >= threshold_db]
    order = np.argsort(-p[idx], kind="stable")
    idx = idx[order]
    return PeakSet(spectrum.grid[idx], p[idx], float(threshold_db), idx)


__all__ = ["AngularSpectrum", "PeakSet", "find_peaks", "DB_FLOOR"]
