"""Command line entry point ``mimo-doa``.

Exit codes: 0 success, 2 configuration or input error, 3 solver failure in
a mandatory estimator.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigError, FormatError, MimoDoaError, SolverDiverged
from ..geometry import BOTTOM_ROW, load_layout, select_subarray, synthesize_virtual_array
from ..scene import DataCube, synthesize_cube
from ..spectral import range_azimuth_map
from ..waveform import TESTBED_CONFIG, derive_metrics, format_report
from .config import load_config
from .cubefile import read_cube, write_cube
from .runner import calibrate_xi, dumps, manifest, round_seed, run_scenario, write_outputs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _config(args, required=True):
    if args.config is None:
        if required:
            raise ConfigError("--config", "a scenario file is required")
        return None
    cfg = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed", "must be >= 0")
        cfg = cfg.with_seed(args.seed)
    return cfg


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_metrics(args):
    cfg = _config(args, required=False)
    wf = TESTBED_CONFIG if cfg is None else cfg.waveform
    m = derive_metrics(wf)
    print(format_report(wf, m))
    payload = {"waveform": wf.to_dict(), "metrics": m.to_dict()}
    if args.out:
        (_out_dir(args) / "metrics.json").write_text(dumps(payload))
    else:
        print(dumps(payload), end="")
    return EXIT_OK


def cmd_simulate(args):
    cfg = _config(args)
    va = synthesize_virtual_array(load_layout(cfg.geometry))
    rng = np.random.default_rng(round_seed(cfg.seed, 0))
    cube = synthesize_cube(cfg.scene, cfg.waveform, va, rng)
    out = _out_dir(args)
    write_cube(out / "cube.rqcb", cube)
    (out / "elements.json").write_text(dumps({
        "units": "half_wavelength",
        "positions": va.elements.tolist(),
        "channel_pairs": [list(p) for p in va.channel_pairs],
    }))
    (out / "manifest.json").write_text(dumps(manifest(cfg, "simulate")))
    print(f"wrote {out / 'cube.rqcb'}: {cube.num_chirps} chirps x {cube.num_elements} "
          f"elements x {cube.num_samples} samples")
    return EXIT_OK


def _summary_line(name, agg):
    rmse = "n/a" if agg["rmse_deg"] is None else f"{agg['rmse_deg']:.4f}"
    fa = "n/a" if agg["mean_false_alarms"] is None else f"{agg['mean_false_alarms']:.2f}"
    return (f"{name:<6} rmse={rmse:>8} deg  mean_false_alarms={fa:>6}  "
            f"resolved={agg['resolved_rounds']}  failed={agg['failed_rounds']}")


def cmd_doa(args):
    cfg = _config(args)
    result = run_scenario(cfg, threads=args.threads)
    if args.out:
        write_outputs(result, _out_dir(args), "doa")
    rep = result.report
    print(f"scenario {rep['scenario']}: {rep['rounds']} rounds, seed {rep['seed']}"
          + (f", xi={rep['xi']}" if rep["xi"] is not None else ""))
    for name, agg in rep["aggregate"].items():
        print(_summary_line(name, agg))
    return EXIT_SOLVER if result.solver_failure else EXIT_OK


def cmd_tune_xi(args):
    cfg = _config(args)
    if not any(e.name == "cs" for e in cfg.estimators):
        raise ConfigError("estimators", "tune-xi needs a cs estimator entry")
    search = calibrate_xi(cfg, threads=args.threads)
    print(f"{'xi':>6} {'false_alarms':>12} {'missed':>6} {'rmse_deg':>9}")
    for t in search.trials:
        if t.report is None:
            print(f"{t.xi:>6.2f}  error: {t.error}")
            continue
        r = t.report
        rmse = "n/a" if r.rmse != r.rmse else f"{r.rmse:.4f}"
        print(f"{t.xi:>6.2f} {r.false_alarms:>12d} {r.missed:>6d} {rmse:>9}")
    print(f"best xi: {search.best_xi}")
    if args.out:
        (_out_dir(args) / "xi_search.json").write_text(dumps(search.to_dict()))
    return EXIT_OK if search.best_xi is not None else EXIT_SOLVER


def _cube_and_array(args):
    """Cube from ``--cube`` (bundled element order assumed) or simulated from ``--config``."""
    cfg = _config(args, required=args.cube is None)
    layout = load_layout(None if cfg is None else cfg.geometry)
    va = synthesize_virtual_array(layout)
    if args.cube is not None:
        cube = read_cube(args.cube)
        if cube.num_elements != va.size:
            raise FormatError(f"cube has {cube.num_elements} elements, layout has {va.size}")
    else:
        rng = np.random.default_rng(round_seed(cfg.seed, 0))
        cube = synthesize_cube(cfg.scene, cfg.waveform, va, rng)
    wf = TESTBED_CONFIG if cfg is None else cfg.waveform
    if cube.num_samples != wf.samples_per_chirp or cube.num_chirps != wf.chirps_per_frame:
        raise FormatError(f"cube shape {cube.shape} does not match the waveform "
                          f"({wf.chirps_per_frame} chirps, {wf.samples_per_chirp} samples)")
    return cube, va, wf


def cmd_map(args):
    cube, va, wf = _cube_and_array(args)
    ula = select_subarray(va, BOTTOM_ROW)
    ra = range_azimuth_map(cube, ula, wf, args.n_fft_r, args.n_fft_a,
                           max_range_bins=args.max_range_bins)
    out = _out_dir(args)
    (out / "range_azimuth.csv").write_text(ra.to_csv())
    (out / "range_azimuth.json").write_text(ra.to_json() + "\n")
    r, a = ra.peak()
    print(f"map {ra.power.shape[0]} ranges x {ra.power.shape[1]} angles; max at {r:.3f} m, {a:.3f} deg")
    return EXIT_OK


def cmd_ingest(args):
    cube = read_cube(args.cube)
    p = np.abs(cube.samples.astype(complex)) ** 2
    info = {"path": str(args.cube), "num_chirps": cube.num_chirps,
            "num_elements": cube.num_elements, "num_samples": cube.num_samples,
            "mean_power": float(p.mean()), "peak_power": float(p.max())}
    print(json.dumps(info, sort_keys=True))
    if args.out:
        (_out_dir(args) / "ingest.json").write_text(dumps(info))
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="mimo-doa", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required,
                       help="scenario JSON, or bundled:<name>")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        return p

    common(sub.add_parser("metrics", help="print derived radar metrics"))
    common(sub.add_parser("simulate", help="synthesize a data cube file"), True)
    common(sub.add_parser("doa", help="run a Monte Carlo DoA scenario"), True)
    common(sub.add_parser("tune-xi", help="exhaustive CS xi search"), True)
    p = common(sub.add_parser("map", help="range-azimuth map on the bottom-row ULA"))
    p.add_argument("--cube", help="cube file to map (default: simulate from --config)")
    p.add_argument("--n-fft-r", type=int, default=None)
    p.add_argument("--n-fft-a", type=int, default=None)
    p.add_argument("--max-range-bins", type=int, default=None)
    p = common(sub.add_parser("ingest", help="validate and summarize a cube file"))
    p.add_argument("--cube", required=True, help="cube file")
    return ap


_COMMANDS = {"metrics": cmd_metrics, "simulate": cmd_simulate, "doa": cmd_doa,
             "tune-xi": cmd_tune_xi, "map": cmd_map, "ingest": cmd_ingest}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.command in ("simulate", "map") and args.out is None:
        args.out = "."
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverDiverged as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except MimoDoaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
