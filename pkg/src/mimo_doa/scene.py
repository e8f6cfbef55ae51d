"""Point-target scenes and simulated receive data.

Two levels of simulation are offered. :func:`snapshot` draws one array
observation ``y = A x + n``. :func:`synthesize_cube` produces the full
TDM-MIMO de-chirped data cube, indexed ``[chirp, virtual element,
fast-time sample]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .doa.steering import steering_matrix
from .errors import ConfigMismatch
from .waveform import SPEED_OF_LIGHT, derive_metrics


@dataclass(frozen=True)
class PointTarget:
    range_m: float
    azimuth_deg: float = 0.0
    elevation_deg: float = 0.0
    velocity_mps: float = 0.0
    reflectivity: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not self.range_m > 0:
            raise ValueError("range_m must be positive")
        if abs(self.azimuth_deg) >= 90 or abs(self.elevation_deg) >= 90:
            raise ValueError("target angles must satisfy |angle| < 90 deg")
        object.__setattr__(self, "reflectivity", complex(self.reflectivity))

    def to_dict(self):
        return {
            "range_m": self.range_m,
            "azimuth_deg": self.azimuth_deg,
            "elevation_deg": self.elevation_deg,
            "velocity_mps": self.velocity_mps,
            "reflectivity": [self.reflectivity.real, self.reflectivity.imag],
        }

    @classmethod
    def from_dict(cls, data):
        refl = data.get("reflectivity", [1.0, 0.0])
        if isinstance(refl, (list, tuple)):
            refl = complex(refl[0], refl[1])
        return cls(float(data["range_m"]), float(data.get("azimuth_deg", 0.0)),
                   float(data.get("elevation_deg", 0.0)),
                   float(data.get("velocity_mps", 0.0)), complex(refl))


@dataclass(frozen=True)
class Scene:
    """Targets plus noise level.

    ``snr_db`` is the per-element, per-fast-time-sample SNR of the strongest
    target, before any FFT gain. ``None`` means noiseless.
    """

    targets: tuple = ()
    snr_db: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.snr_db is not None and not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite or None")

    @property
    def noise_power(self):
        if self.snr_db is None:
            return 0.0
        # an empty scene references a unit-reflectivity target
        peak = max((abs(t.reflectivity) ** 2 for t in self.targets), default=1.0)
        return peak / 10 ** (self.snr_db / 10)

    def validate_for(self, cfg):
        """Check every target is unambiguous in range and velocity."""
        m = derive_metrics(cfg)
        for i, t in enumerate(self.targets):
            if t.range_m > m.max_range:
                raise ValueError(f"target {i}: range {t.range_m} m beyond max range {m.max_range:.3f} m")
            if abs(t.velocity_mps) > m.max_velocity:
                raise ValueError(f"target {i}: |velocity| exceeds {m.max_velocity:.3f} m/s")

    def to_dict(self):
        return {"targets": [t.to_dict() for t in self.targets], "snr_db": self.snr_db}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(PointTarget.from_dict(t) for t in data.get("targets", [])),
                   data.get("snr_db"))


def complex_noise(rng, shape, power):
    """Circular complex Gaussian noise with ``E|n|^2 = power``."""
    if power == 0:
        return np.zeros(shape, complex)
    scale = math.sqrt(power / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def snapshot(scene, positions, wavelength=1.0, rng=None):
    """One array observation ``y = A x + n`` for the targets in ``scene``.

    Args:
        scene: Targets and SNR.
        positions: ``(V, 2)`` element coordinates in units of ``wavelength``.
        wavelength: Length unit of ``positions``.
        rng: ``numpy.random.Generator``; required unless the scene is noiseless.
    """
    pos = np.asarray(positions, float).reshape(-1, 2)
    y = np.zeros(pos.shape[0], complex)
    if scene.targets:
        az = [t.azimuth_deg for t in scene.targets]
        el = [t.elevation_deg for t in scene.targets]
        beta = np.array([t.reflectivity for t in scene.targets])
        y = steering_matrix(az, el, pos, wavelength) @ beta
    if scene.snr_db is not None:
        if rng is None:
            raise ValueError("rng is required for a noisy scene")
        y = y + complex_noise(rng, y.shape, scene.noise_power)
    return y


@dataclass(frozen=True)
class DataCube:
    """Complex baseband samples ``[chirp, element, fast-time sample]``.

    ``element_positions`` (half-wavelength units) and ``channel_pairs``
    describe the element axis when known; ingested cubes may lack them.
    """

    samples: np.ndarray
    element_positions: np.ndarray | None = field(default=None, repr=False)
    channel_pairs: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim != 3:
            raise ValueError("cube samples must be 3-D [chirp, element, sample]")
        if not np.iscomplexobj(s):
            s = s.astype(complex)
        if not np.all(np.isfinite(s)):
            raise ValueError("cube contains non-finite samples")
        object.__setattr__(self, "samples", s)
        if self.element_positions is not None and len(self.element_positions) != s.shape[1]:
            raise ValueError("element_positions length does not match the element axis")

    @property
    def shape(self):
        return self.samples.shape

    @property
    def num_chirps(self):
        return self.samples.shape[0]

    @property
    def num_elements(self):
        return self.samples.shape[1]

    @property
    def num_samples(self):
        return self.samples.shape[2]


def synthesize_cube(scene, cfg, va, rng=None, elements=None):
    """Simulate the de-chirped TDM-MIMO cube.

    Each channel is one virtual element, sampled through its first
    contributing ``(tx, rx)`` pair. Transmitter ``t`` fires in slot ``t`` of
    every TDM period, so a moving target picks up an extra Doppler phase of
    ``2 pi f_D t T_slot`` on that channel. No compensation is applied here.

    Args:
        scene: Targets and SNR.
        cfg: Waveform configuration.
        va: Virtual array; its transmitter count must match ``cfg.num_tx``.
        rng: Random generator for the noise; required for noisy scenes.
        elements: Optional indices of virtual elements to simulate
            (default: all, in array order).

    Raises:
        ConfigMismatch: ``va`` was built from a different number of transmitters.
    """
    if va.num_tx != cfg.num_tx:
        raise ConfigMismatch(f"virtual array has {va.num_tx} TX, waveform expects {cfg.num_tx}")
    idx = np.arange(va.size) if elements is None else np.asarray(elements, int)
    pos = va.elements[idx]
    pairs = tuple(va.channel_pairs[i] for i in idx)
    tx_slot = np.array([p[0] for p in pairs], float)

    n_c, n_s = cfg.chirps_per_frame, cfg.samples_per_chirp
    lam = cfg.wavelength
    chirp_t = np.arange(n_c) * cfg.chirp_duration
    sample_idx = np.arange(n_s)
    cube = np.zeros((n_c, len(idx), n_s), complex)

    for t in scene.targets:
        f_if = 2 * t.range_m * cfg.sweep_slope / SPEED_OF_LIGHT
        f_d = 2 * t.velocity_mps / lam
        # positions are in half-wavelengths, hence wavelength=2
        spatial = steering_matrix(t.azimuth_deg, t.elevation_deg, pos, 2.0)[:, 0]
        slow_time = chirp_t[:, None] + tx_slot[None, :] * cfg.slot_duration
        slow = np.exp(2j * np.pi * f_d * slow_time) * spatial[None, :]
        fast = np.exp(2j * np.pi * f_if * sample_idx / cfg.sample_rate)
        cube += t.reflectivity * slow[:, :, None] * fast[None, None, :]

    if scene.snr_db is not None:
        if rng is None:
            raise ValueError("rng is required for a noisy scene")
        cube += complex_noise(rng, cube.shape, scene.noise_power)
    return DataCube(cube, pos, pairs)
