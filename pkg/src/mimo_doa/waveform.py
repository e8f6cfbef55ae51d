"""FMCW chirp configuration and derived radar performance figures."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .errors import DomainError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class WaveformConfig:
    """Chirp and frame parameters of a TDM-MIMO FMCW radar.

    ``chirp_duration`` is the slow-time sampling period of one virtual
    channel: with TDM every transmitter fires once per period, so it equals
    ``chirp_interval * num_tx``. ``chirp_interval`` is optional; when given
    the TDM relation is enforced.
    """

    carrier_freq: float = 77e9
    sweep_bandwidth: float = 384e6
    sweep_slope: float = 45e12
    sample_rate: float = 15e6
    chirps_per_frame: int = 128
    samples_per_chirp: int = 128
    chirp_duration: float = 240e-6
    frame_duration: float = 1 / 30
    num_tx: int = 12
    chirp_interval: float | None = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{f.name} must be a positive finite number, got {v!r}")
        for name in ("chirps_per_frame", "samples_per_chirp", "num_tx"):
            if int(getattr(self, name)) != getattr(self, name):
                raise ValueError(f"{name} must be an integer")
        window = self.samples_per_chirp / self.sample_rate
        sweep = self.sweep_bandwidth / self.sweep_slope
        if window > sweep * (1 + 1e-9):
            raise ValueError(
                f"sampling window {window:.6g} s exceeds sweep time {sweep:.6g} s"
            )
        if self.chirp_interval is not None:
            expected = self.chirp_interval * self.num_tx
            if not math.isclose(self.chirp_duration, expected, rel_tol=1e-9):
                raise ValueError(
                    f"chirp_duration {self.chirp_duration} != chirp_interval x num_tx = {expected}"
                )

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def slot_duration(self):
        """Time between consecutive TX slots inside one TDM period."""
        return self.chirp_duration / self.num_tx

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown waveform fields: {sorted(unknown)}")
        return cls(**data)


#: Configuration of the 4-chip cascaded test-bed.
TESTBED_CONFIG = WaveformConfig(chirp_interval=20e-6)

#: Apertures of the bundled cascaded layout, in wavelengths.
HORIZONTAL_APERTURE = 42.5
VERTICAL_APERTURE = 3.0


@dataclass(frozen=True)
class DerivedMetrics:
    range_resolution: float
    velocity_resolution: float
    azimuth_resolution: float
    elevation_resolution: float
    max_range: float
    max_velocity: float
    wavelength: float

    def to_dict(self):
        return asdict(self)


def derive_metrics(cfg, aperture_h=HORIZONTAL_APERTURE, aperture_v=VERTICAL_APERTURE,
                   boresight_deg=0.0):
    """Resolution and ambiguity limits for ``cfg``.

    Args:
        cfg: Waveform configuration.
        aperture_h: Horizontal aperture in wavelengths.
        aperture_v: Vertical aperture in wavelengths.
        boresight_deg: Look angle at which angular resolution is evaluated.

    Returns:
        DerivedMetrics with distances in metres, speeds in m/s and angles in
        degrees.

    Raises:
        DomainError: the look angle has ``cos <= 0`` or an aperture is not positive.
    """
    if not (aperture_h > 0 and aperture_v > 0):
        raise DomainError("apertures must be positive")
    cos_t = math.cos(math.radians(boresight_deg))
    if abs(boresight_deg) >= 90 or cos_t <= 0:
        raise DomainError(f"boresight angle {boresight_deg} deg has no finite resolution")
    c = SPEED_OF_LIGHT
    lam = cfg.wavelength
    return DerivedMetrics(
        range_resolution=c / (2 * cfg.sweep_bandwidth),
        velocity_resolution=lam / (2 * cfg.chirps_per_frame * cfg.chirp_duration),
        # aperture is in wavelengths, so lambda / L reduces to 1 / aperture
        azimuth_resolution=math.degrees(1.0 / (aperture_h * cos_t)),
        elevation_resolution=math.degrees(1.0 / (aperture_v * cos_t)),
        max_range=cfg.sample_rate * c / (2 * cfg.sweep_slope),
        max_velocity=lam / (4 * cfg.chirp_duration),
        wavelength=lam,
    )


_REPORT_ROWS = (
    ("Range resolution", "range_resolution", "m", "c / 2B"),
    ("Velocity resolution", "velocity_resolution", "m/s", "lambda / (2 Nc Tc)"),
    ("Azimuth resolution", "azimuth_resolution", "deg", "lambda / (Lh cos theta)"),
    ("Elevation resolution", "elevation_resolution", "deg", "lambda / (Lv cos theta)"),
    ("Max range", "max_range", "m", "fs c / 2S"),
    ("Max velocity", "max_velocity", "m/s", "lambda / (4 Tc)"),
    ("Wavelength", "wavelength", "m", "c / fc"),
)


def format_report(cfg, metrics):
    """Aligned two-part text table: configuration, then derived figures."""
    lines = ["Configuration"]
    config_rows = [
        ("Carrier frequency", f"{cfg.carrier_freq / 1e9:g} GHz"),
        ("Sweep bandwidth", f"{cfg.sweep_bandwidth / 1e6:g} MHz"),
        ("Sweep slope", f"{cfg.sweep_slope / 1e12:g} MHz/us"),
        ("Sampling frequency", f"{cfg.sample_rate / 1e6:g} Msps"),
        ("Chirps per frame", f"{cfg.chirps_per_frame}"),
        ("Samples per chirp", f"{cfg.samples_per_chirp}"),
        ("Chirp duration", f"{cfg.chirp_duration * 1e6:g} us"),
        ("Frame duration", f"{cfg.frame_duration:.6g} s"),
        ("TX antennas", f"{cfg.num_tx}"),
    ]
    width = max(len(r[0]) for r in config_rows + [(r[0],) for r in _REPORT_ROWS])
    lines += [f"  {name:<{width}}  {value}" for name, value in config_rows]
    lines.append("Derived")
    for name, key, unit, formula in _REPORT_ROWS:
        lines.append(f"  {name:<{width}}  {getattr(metrics, key):>12.6g} {unit:<4} {formula}")
    return "\n".join(lines)
