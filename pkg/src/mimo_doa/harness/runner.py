"""Monte Carlo driver: simulate, estimate, score, aggregate, write artifacts.

Seeds: round ``r`` draws its noise from ``numpy.random.default_rng([seed, 0, r])``
and the xi calibration realization from ``default_rng([seed, 1, 0])``. Each
round depends only on its own seed, so rounds can run in any order or in
parallel and give the same results.
"""

from __future__ import annotations

import json
import math
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..doa import (build_dictionary, default_grid, doa_cs, doa_fft, doa_music, evaluate,
                   find_peaks, pooled_rmse, tune_xi)
from ..errors import ConvergenceError, MimoDoaError, SolverDiverged
from ..geometry import load_layout, select_subarray, synthesize_virtual_array
from ..scene import synthesize_cube
from ..spectral import doppler_peak_snapshot, range_gate

SOLVER_ERRORS = (SolverDiverged, ConvergenceError)
_SOLVER_KEYS = ("tol", "kkt_tol", "max_iter")


def round_seed(seed, r):
    return [int(seed), 0, int(r)]


def calibration_seed(seed):
    return [int(seed), 1, 0]


@dataclass(frozen=True)
class Setup:
    """Arrays and dictionary shared by all rounds of a scenario."""

    virtual_array: object
    subarray: object
    dictionary: object


def prepare(cfg):
    va = synthesize_virtual_array(load_layout(cfg.geometry))
    sub = select_subarray(va, cfg.subarray)
    grid = default_grid(cfg.grid_step, cfg.grid_limit)
    # element coordinates are in half wavelengths
    d = build_dictionary(grid, va.elements[sub.indices], 2.0, axis=cfg.axis)
    return Setup(va, sub, d)


def gated_snapshots(cfg, setup, rng):
    """Simulate the subarray channels of one frame and range-gate them: ``(V, N_c)``."""
    cube = synthesize_cube(cfg.scene, cfg.waveform, setup.virtual_array, rng,
                           elements=setup.subarray.indices)
    gate = cfg.gate_range
    if gate is None:
        gate = cfg.waveform.sample_rate * 299_792_458.0 / (4 * cfg.waveform.sweep_slope)
    return range_gate(cube, cfg.waveform, gate)


def cs_snapshot(Y, cfg, mode):
    if mode == "chirp":
        return Y[:, 0]
    return doppler_peak_snapshot(Y, cfg.waveform)


def _solver_opts(opts):
    return {k: opts[k] for k in _SOLVER_KEYS if k in opts}


def calibrate_xi(cfg, setup=None, spec=None, threads=1):
    """Run the xi search on the calibration realization of ``cfg``."""
    setup = setup or prepare(cfg)
    spec = spec or next(e for e in cfg.estimators if e.name == "cs")
    Y = gated_snapshots(cfg, setup, np.random.default_rng(calibration_seed(cfg.seed)))
    y = cs_snapshot(Y, cfg, spec.options.get("snapshot", "doppler_peak"))
    return tune_xi(y, setup.dictionary, cfg.truth, spec.options["xi_grid"], cfg.threshold_db,
                   cfg.match_radius, threads, **_solver_opts(spec.options))


def _run_estimator(spec, Y, cfg, setup, xi):
    d = setup.dictionary
    if spec.name == "fft":
        return doa_fft(Y, d), None
    if spec.name == "music":
        return doa_music(Y, int(spec.options["K"]), d,
                         spec.options.get("loading", 1e-6)), None
    res = doa_cs(cs_snapshot(Y, cfg, spec.options["snapshot"]), d, xi,
                 **_solver_opts(spec.options))
    h = np.asarray(res.solver.history)
    monotone = bool(np.all(np.diff(h) <= 1e-12 * np.maximum(np.abs(h[:-1]), 1.0)))
    return res.spectrum, {**res.to_dict(), "monotone": monotone}


def run_round(cfg, setup, r, seed_words, xis):
    """One Monte Carlo round; estimator failures are recorded, not raised."""
    Y = gated_snapshots(cfg, setup, np.random.default_rng(seed_words))
    out = {"round": r, "seed": list(seed_words), "estimators": {}}
    spectra = {}
    for spec in cfg.estimators:
        entry = {}
        try:
            spectrum, solver = _run_estimator(spec, Y, cfg, setup, xis.get(spec.name))
        except MimoDoaError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
            entry["solver_failure"] = isinstance(exc, SOLVER_ERRORS)
        else:
            peaks = find_peaks(spectrum, cfg.threshold_db)
            rep = evaluate(peaks, cfg.truth, cfg.match_radius)
            entry.update(rep.to_dict())
            entry["peaks"] = peaks.to_dict()["peaks"]
            if solver is not None:
                entry["solver"] = solver
            spectra[spec.name] = spectrum
            entry["_report"] = rep
        out["estimators"][spec.name] = entry
    return out, spectra


def _aggregate(rounds, name):
    entries = [r["estimators"][name] for r in rounds]
    ok = [e for e in entries if "_report" in e]
    reps = [e["_report"] for e in ok]
    rmse = pooled_rmse(reps)
    agg = {
        "rmse_deg": None if math.isnan(rmse) else rmse,
        "mean_false_alarms": (sum(r.false_alarms for r in reps) / len(reps)) if reps else None,
        "total_false_alarms": sum(r.false_alarms for r in reps),
        "resolved_rounds": sum(r.resolved for r in reps),
        "failed_rounds": len(entries) - len(ok),
        "solver_failures": sum(bool(e.get("solver_failure")) for e in entries),
    }
    solver = [e["solver"] for e in ok if "solver" in e]
    if solver:
        agg["max_kkt_residual"] = max(s["kkt_residual"] for s in solver)
        agg["all_converged"] = all(s["converged"] for s in solver)
        agg["all_monotone"] = all(s["monotone"] for s in solver)
    return agg


@dataclass
class ScenarioResult:
    config: object
    report: dict
    spectra: dict

    @property
    def solver_failure(self):
        """True when a mandatory estimator hit a solver error in any round."""
        mandatory = {e.name for e in self.config.estimators if e.mandatory}
        return any(self.report["aggregate"][n]["solver_failures"] > 0 for n in mandatory)

    def rmse(self, name):
        v = self.report["aggregate"][name]["rmse_deg"]
        return math.nan if v is None else v


def run_scenario(cfg, threads=1, round_seeds=None):
    """Run every round of ``cfg`` and aggregate.

    Args:
        cfg: Validated scenario.
        threads: Worker threads for rounds and the xi search.
        round_seeds: Optional explicit seed per round (default: the counter
            scheme in the module docstring).

    Returns:
        :class:`ScenarioResult` with a JSON-ready report and the round-0 spectra.
    """
    setup = prepare(cfg)
    seeds = [round_seed(cfg.seed, r) for r in range(cfg.rounds)] if round_seeds is None \
        else [list(np.atleast_1d(s).tolist()) for s in round_seeds]

    xis, xi_search = {}, None
    for spec in cfg.estimators:
        if spec.name != "cs":
            continue
        if spec.options["xi"] == "auto":
            xi_search = calibrate_xi(cfg, setup, spec, threads)
            if xi_search.best_xi is None:
                raise SolverDiverged("xi calibration failed for every grid value")
            xis["cs"] = xi_search.best_xi
        else:
            xis["cs"] = float(spec.options["xi"])

    def job(i):
        return run_round(cfg, setup, i, seeds[i], xis)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(job, range(len(seeds))))
    else:
        results = [job(i) for i in range(len(seeds))]
    rounds = [r for r, _ in results]
    spectra = results[0][1] if results else {}

    report = {
        "scenario": cfg.name,
        "seed": cfg.seed,
        "rounds": len(rounds),
        "axis": cfg.axis,
        "truth_deg": cfg.truth,
        "threshold_db": cfg.threshold_db,
        "match_radius_deg": cfg.match_radius,
        "subarray_positions": setup.subarray.positions.tolist(),
        "xi": xis.get("cs"),
        "xi_search": None if xi_search is None else xi_search.to_dict(),
        "aggregate": {s.name: _aggregate(rounds, s.name) for s in cfg.estimators},
        "per_round": [_strip(r) for r in rounds],
    }
    return ScenarioResult(cfg, report, spectra)


def _strip(round_out):
    est = {k: {kk: vv for kk, vv in v.items() if not kk.startswith("_")}
           for k, v in round_out["estimators"].items()}
    return {**round_out, "estimators": est}


def dumps(obj):
    """Deterministic JSON: sorted keys, fixed indentation, no NaN."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def manifest(cfg, command):
    import scipy

    from .. import __version__
    return {
        "command": command,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "seed_scheme": {"round": "default_rng([seed, 0, r])",
                        "xi_calibration": "default_rng([seed, 1, 0])"},
        "versions": {"mimo_doa": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
    }


def write_outputs(result, out_dir, command="doa"):
    """Write ``report.json``, ``manifest.json`` and round-0 spectra (CSV + JSON)."""
    out = Path(out_dir)
    (out / "spectra").mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps(result.report))
    (out / "manifest.json").write_text(dumps(manifest(result.config, command)))
    for name, spec in sorted(result.spectra.items()):
        (out / "spectra" / f"{name}.csv").write_text(spec.to_csv())
        (out / "spectra" / f"{name}.json").write_text(dumps(spec.to_dict()))
    return out
