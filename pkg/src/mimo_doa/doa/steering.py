"""Steering vectors and grid dictionaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError

AZIMUTH = "azimuth"
ELEVATION = "elevation"


def _check_angles(*angles):
    for a in angles:
        if np.any(np.abs(a) > 90):
            raise DomainError("angles must satisfy |angle| <= 90 deg")


def steering_matrix(azimuth_deg, elevation_deg, positions, wavelength=1.0):
    """Steering vectors for paired (azimuth, elevation) angles.

    Element ``e`` at ``(h_e, v_e)`` sees the phase
    ``2 pi / wavelength * (h_e sin(az) cos(el) + v_e sin(el))``. For a
    uniform planar array this factors into the Kronecker product of an
    elevation vector and an azimuth vector.

    Args:
        azimuth_deg: Array of ``K`` azimuth angles in degrees.
        elevation_deg: Array of ``K`` elevation angles (broadcast against azimuth).
        positions: ``(V, 2)`` element coordinates, same unit as ``wavelength``.
        wavelength: Defaults to 1, i.e. positions given in wavelengths.

    Returns:
        ``(V, K)`` complex matrix with unit-modulus entries.
    """
    az, el = np.broadcast_arrays(np.atleast_1d(np.asarray(azimuth_deg, float)),
                                 np.atleast_1d(np.asarray(elevation_deg, float)))
    _check_angles(az, el)
    pos = np.asarray(positions, float).reshape(-1, 2)
    az_r = np.deg2rad(az)
    el_r = np.deg2rad(el)
    u = np.sin(az_r) * np.cos(el_r)
    v = np.sin(el_r)
    phase = (2 * np.pi / wavelength) * (np.outer(pos[:, 0], u) + np.outer(pos[:, 1], v))
    return np.exp(1j * phase)


def steering_vector(azimuth_deg, elevation_deg, positions, wavelength=1.0):
    """Single steering vector; see :func:`steering_matrix`."""
    return steering_matrix(azimuth_deg, elevation_deg, positions, wavelength)[:, 0]


def default_grid(step=0.1, limit=90.0):
    """Uniform angle grid ``-limit..limit`` inclusive (1801 points at 0.1 deg)."""
    n = int(round(2 * limit / step)) + 1
    return np.linspace(-limit, limit, n)


@dataclass(frozen=True)
class SteeringDictionary:
    """Grid of candidate directions and their steering vectors.

    Attributes:
        grid: ``(K_g,)`` angles for a 1-D search or ``(K_g, 2)`` (azimuth,
            elevation) pairs for a 2-D search, in degrees.
        matrix: ``(V, K_g)`` steering matrix.
        positions: Element coordinates used to build ``matrix``.
        wavelength: Unit of ``positions``.
        normalized: Whether columns were scaled to unit norm.
        axis: ``"azimuth"`` or ``"elevation"`` for 1-D grids, ``None`` for 2-D.
    """

    grid: np.ndarray
    matrix: np.ndarray
    positions: np.ndarray
    wavelength: float
    normalized: bool
    axis: str | None

    @property
    def num_elements(self):
        return self.matrix.shape[0]

    @property
    def size(self):
        return self.matrix.shape[1]


def build_dictionary(grid, positions, wavelength=1.0, normalize=False, axis=ELEVATION):
    """Stack steering vectors for every grid point.

    A 1-D ``grid`` scans ``axis`` with the other angle held at 0 deg; a
    ``(K, 2)`` grid gives explicit (azimuth, elevation) pairs.
    """
    g = np.asarray(grid, float)
    if g.size == 0:
        raise ValueError("grid must not be empty")
    if g.ndim == 1:
        if np.any(np.diff(g) <= 0):
            raise ValueError("1-D grid must be strictly increasing")
        if axis == AZIMUTH:
            A = steering_matrix(g, 0.0, positions, wavelength)
        elif axis == ELEVATION:
            A = steering_matrix(0.0, g, positions, wavelength)
        else:
            raise ValueError(f"axis must be {AZIMUTH!r} or {ELEVATION!r}")
    elif g.ndim == 2 and g.shape[1] == 2:
        A = steering_matrix(g[:, 0], g[:, 1], positions, wavelength)
        axis = None
    else:
        raise ValueError("grid must be 1-D or (K, 2)")
    if normalize:
        A = A / np.linalg.norm(A, axis=0, keepdims=True)
    return SteeringDictionary(g, A, np.asarray(positions, float).reshape(-1, 2),
                              float(wavelength), bool(normalize), axis)
