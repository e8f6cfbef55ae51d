"""Scenario configuration files.

A scenario is one JSON object::

    {
      "name": "mra_two_targets",
      "waveform": {...WaveformConfig fields...},      # optional, default test-bed config
      "geometry": "bundled" | "path/to/layout.json",  # relative paths resolve against the file
      "subarray": {"axis": "vertical", "at": 11},
      "scene": {"targets": [...], "snr_db": 20},
      "grid": {"step_deg": 0.1, "limit_deg": 90},
      "threshold_db": -6, "match_radius_deg": 2,
      "estimators": [{"name": "fft"}, {"name": "music", "K": 2}, {"name": "cs", "xi": 1.4}],
      "rounds": 30, "seed": 1
    }

Every validation failure raises :class:`~mimo_doa.errors.ConfigError`
carrying the dotted path of the offending field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..errors import ConfigError
from ..geometry import HORIZONTAL, VERTICAL, SubarraySelector
from ..scene import PointTarget, Scene
from ..waveform import TESTBED_CONFIG, WaveformConfig

ESTIMATORS = ("fft", "music", "cs")
SNAPSHOT_MODES = ("doppler_peak", "chirp")
DEFAULT_XI_GRID = tuple(round(0.1 * k, 1) for k in range(1, 31))


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator entry.

    ``options`` by estimator:
        music: ``K`` (default: number of targets), ``loading``.
        cs: ``xi`` (number or ``"auto"``), ``xi_grid``, ``snapshot``
            (``"doppler_peak"`` or ``"chirp"``), ``tol``, ``kkt_tol``, ``max_iter``.
    ``mandatory`` estimators turn a solver failure into exit code 3.
    """

    name: str
    options: dict = field(default_factory=dict)
    mandatory: bool = True

    def to_dict(self):
        return {"name": self.name, **self.options, "mandatory": self.mandatory}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    waveform: WaveformConfig
    geometry: str
    subarray: SubarraySelector
    scene: Scene
    estimators: tuple
    rounds: int = 1
    seed: int = 0
    grid_step: float = 0.1
    grid_limit: float = 90.0
    threshold_db: float = -6.0
    match_radius: float = 2.0
    gate_range_m: float | None = None

    @property
    def axis(self):
        """Angle scanned by the subarray: vertical lines see elevation."""
        return "elevation" if self.subarray.axis == VERTICAL else "azimuth"

    @property
    def truth(self):
        key = "elevation_deg" if self.axis == "elevation" else "azimuth_deg"
        return [getattr(t, key) for t in self.scene.targets]

    @property
    def gate_range(self):
        if self.gate_range_m is not None:
            return self.gate_range_m
        return self.scene.targets[0].range_m if self.scene.targets else None

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def to_dict(self):
        return {
            "name": self.name,
            "waveform": self.waveform.to_dict(),
            "geometry": self.geometry,
            "subarray": self.subarray.to_dict(),
            "scene": self.scene.to_dict(),
            "grid": {"step_deg": self.grid_step, "limit_deg": self.grid_limit},
            "threshold_db": self.threshold_db,
            "match_radius_deg": self.match_radius,
            "gate_range_m": self.gate_range_m,
            "estimators": [e.to_dict() for e in self.estimators],
            "rounds": self.rounds,
            "seed": self.seed,
        }


def _number(value, path, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(path, f"must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _seed(value, path="seed"):
    value = _number(value, path, integer=True)
    if value < 0:
        raise ConfigError(path, "must be >= 0")
    return value


def _section(data, key, kind=dict):
    v = data.get(key)
    if v is not None and not isinstance(v, kind):
        raise ConfigError(key, f"expected {kind.__name__}")
    return v


def _parse_target(d, path):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    for k in ("range_m", "azimuth_deg", "elevation_deg", "velocity_mps"):
        if k in d:
            _number(d[k], f"{path}.{k}", positive=(k == "range_m"))
    if "range_m" not in d:
        raise ConfigError(f"{path}.range_m", "missing")
    refl = d.get("reflectivity", [1.0, 0.0])
    if not (isinstance(refl, (list, tuple)) and len(refl) == 2):
        raise ConfigError(f"{path}.reflectivity", "expected [re, im]")
    for i, r in enumerate(refl):
        _number(r, f"{path}.reflectivity[{i}]")
    try:
        return PointTarget.from_dict(d)
    except (ValueError, KeyError) as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_estimator(d, i, n_targets):
    path = f"estimators[{i}]"
    if isinstance(d, str):
        d = {"name": d}
    if not isinstance(d, dict) or "name" not in d:
        raise ConfigError(path, "expected an object with a name")
    name = d["name"]
    if name not in ESTIMATORS:
        raise ConfigError(f"{path}.name", f"unknown estimator {name!r}; choose from {ESTIMATORS}")
    opts = {k: v for k, v in d.items() if k not in ("name", "mandatory")}
    mandatory = d.get("mandatory", True)
    if not isinstance(mandatory, bool):
        raise ConfigError(f"{path}.mandatory", "expected true or false")
    if name == "music":
        opts.setdefault("K", n_targets)
        _number(opts["K"], f"{path}.K", integer=True)
        if opts["K"] < 0:
            raise ConfigError(f"{path}.K", "must be >= 0")
        if "loading" in opts:
            _number(opts["loading"], f"{path}.loading")
    elif name == "cs":
        xi = opts.setdefault("xi", 1.4)
        if xi != "auto":
            _number(xi, f"{path}.xi", positive=True)
        grid = opts.setdefault("xi_grid", list(DEFAULT_XI_GRID))
        if not isinstance(grid, list) or not grid:
            raise ConfigError(f"{path}.xi_grid", "expected a non-empty list")
        for j, g in enumerate(grid):
            _number(g, f"{path}.xi_grid[{j}]", positive=True)
        mode = opts.setdefault("snapshot", "doppler_peak")
        if mode not in SNAPSHOT_MODES:
            raise ConfigError(f"{path}.snapshot", f"choose from {SNAPSHOT_MODES}")
        for k in ("tol", "kkt_tol"):
            if k in opts:
                _number(opts[k], f"{path}.{k}", positive=True)
        if "max_iter" in opts:
            _number(opts["max_iter"], f"{path}.max_iter", positive=True, integer=True)
    return EstimatorSpec(name, opts, mandatory)


def parse_config(data, base_dir=None):
    """Validate a decoded scenario dict and build a :class:`ScenarioConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")

    wf = _section(data, "waveform")
    try:
        waveform = TESTBED_CONFIG if wf is None else WaveformConfig.from_dict(wf)
    except (TypeError, ValueError) as exc:
        raise ConfigError("waveform", str(exc)) from exc

    geometry = data.get("geometry", "bundled")
    if not isinstance(geometry, str):
        raise ConfigError("geometry", "expected 'bundled' or a file path")
    if geometry != "bundled":
        p = Path(geometry)
        if not p.is_absolute() and base_dir is not None:
            p = Path(base_dir) / p
        if not p.is_file():
            raise ConfigError("geometry", f"file not found: {p}")
        geometry = str(p)

    sub = _section(data, "subarray")
    if sub is None:
        raise ConfigError("subarray", "missing")
    if sub.get("axis") not in (HORIZONTAL, VERTICAL):
        raise ConfigError("subarray.axis", f"expected {HORIZONTAL!r} or {VERTICAL!r}")
    _number(sub.get("at"), "subarray.at")
    span = sub.get("span")
    if span is not None:
        if not (isinstance(span, list) and len(span) == 2):
            raise ConfigError("subarray.span", "expected [lo, hi]")
        for j, s in enumerate(span):
            _number(s, f"subarray.span[{j}]")
    subarray = SubarraySelector.from_dict(sub)

    sc = _section(data, "scene") or {}
    targets = sc.get("targets", [])
    if not isinstance(targets, list):
        raise ConfigError("scene.targets", "expected a list")
    parsed = tuple(_parse_target(t, f"scene.targets[{i}]") for i, t in enumerate(targets))
    snr = sc.get("snr_db")
    if snr is not None:
        _number(snr, "scene.snr_db")
    scene = Scene(parsed, snr)
    try:
        scene.validate_for(waveform)
    except ValueError as exc:
        raise ConfigError("scene.targets", str(exc)) from exc

    grid = _section(data, "grid") or {}
    step = _number(grid.get("step_deg", 0.1), "grid.step_deg", positive=True)
    limit = _number(grid.get("limit_deg", 90.0), "grid.limit_deg", positive=True)
    if limit > 90:
        raise ConfigError("grid.limit_deg", "must be <= 90")

    ests = data.get("estimators", list(ESTIMATORS))
    if not isinstance(ests, list) or not ests:
        raise ConfigError("estimators", "expected a non-empty list")
    estimators = tuple(_parse_estimator(e, i, len(parsed)) for i, e in enumerate(ests))
    names = [e.name for e in estimators]
    if len(set(names)) != len(names):
        raise ConfigError("estimators", "duplicate estimator names")

    gate = data.get("gate_range_m")
    if gate is not None:
        _number(gate, "gate_range_m", positive=True)

    known = {"name", "description", "waveform", "geometry", "subarray", "scene", "grid",
             "threshold_db", "match_radius_deg", "estimators", "rounds", "seed", "gate_range_m"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")

    return ScenarioConfig(
        name=str(data.get("name", "scenario")),
        waveform=waveform,
        geometry=geometry,
        subarray=subarray,
        scene=scene,
        estimators=estimators,
        rounds=_number(data.get("rounds", 1), "rounds", positive=True, integer=True),
        seed=_seed(data.get("seed", 0)),
        grid_step=step,
        grid_limit=limit,
        threshold_db=_number(data.get("threshold_db", -6.0), "threshold_db"),
        match_radius=_number(data.get("match_radius_deg", 2.0), "match_radius_deg", positive=True),
        gate_range_m=gate,
    )


def load_config(path):
    """Read and validate a scenario file (``bundled:<name>`` reads a packaged one)."""
    if str(path).startswith("bundled:"):
        from importlib import resources
        name = str(path).split(":", 1)[1]
        res = resources.files("mimo_doa.data").joinpath(f"{name}.json")
        if not res.is_file():
            raise ConfigError("--config", f"no bundled scenario named {name!r}")
        return parse_config(json.loads(res.read_text()))
    p = Path(path)
    if not p.is_file():
        raise ConfigError("--config", f"file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from exc
    return parse_config(data, p.parent)
