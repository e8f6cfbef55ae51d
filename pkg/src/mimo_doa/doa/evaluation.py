"""Peak-to-truth matching, RMSE and false-alarm scoring, and the xi search."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import MimoDoaError
from .estimators import doa_cs
from .spectrum import find_peaks

MATCH_RADIUS = 2.0
THRESHOLD_DB = -6.0


@dataclass(frozen=True)
class EstimatorReport:
    """Detection quality of one spectrum against known truth.

    ``errors`` holds the signed angle error of every matched truth (in truth
    order, NaN when missed). ``rmse`` is NaN when nothing matched.
    """

    rmse: float
    false_alarms: int
    missed: int
    resolved: bool
    errors: tuple = field(default=())

    @property
    def squared_errors(self):
        return [e * e for e in self.errors if not math.isnan(e)]

    def to_dict(self):
        return {
            "rmse_deg": None if math.isnan(self.rmse) else float(self.rmse),
            "false_alarms": int(self.false_alarms),
            "missed": int(self.missed),
            "resolved": bool(self.resolved),
            "errors_deg": [None if math.isnan(e) else float(e) for e in self.errors],
        }


def _angle_distance(a, b):
    return float(np.linalg.norm(np.atleast_1d(np.asarray(a, float) - np.asarray(b, float))))


def evaluate(peaks, truth, match_radius=MATCH_RADIUS):
    """Greedily match peaks to true angles and score the result.

    The closest (peak, truth) pair within ``match_radius`` is matched first,
    then the next closest among the remaining ones, and so on. For 2-D
    angles the distance is Euclidean in (azimuth, elevation) degrees and the
    recorded error is that distance.
    """
    if not match_radius > 0:
        raise ValueError("match_radius must be positive")
    truth = list(np.atleast_1d(np.asarray(truth, float)))
    angles = list(peaks.angles)
    cand = []
    for i, p in enumerate(angles):
        for j, t in enumerate(truth):
            d = _angle_distance(p, t)
            if d <= match_radius:
                cand.append((d, i, j))
    cand.sort()
    used_p, used_t = set(), set()
    errors = [math.nan] * len(truth)
    for d, i, j in cand:
        if i in used_p or j in used_t:
            continue
        used_p.add(i)
        used_t.add(j)
        diff = np.asarray(angles[i], float) - truth[j]
        errors[j] = float(diff) if diff.ndim == 0 else d
    matched = [e for e in errors if not math.isnan(e)]
    rmse = math.sqrt(sum(e * e for e in matched) / len(matched)) if matched else math.nan
    missed = len(truth) - len(matched)
    return EstimatorReport(rmse, len(angles) - len(matched), missed, missed == 0, tuple(errors))


def pooled_rmse(reports):
    """Root of the mean squared error over every matched target of every report."""
    sq = [s for r in reports for s in r.squared_errors]
    return math.sqrt(math.fsum(sq) / len(sq)) if sq else math.nan


@dataclass(frozen=True)
class XiTrial:
    xi: float
    report: EstimatorReport | None
    error: str | None = None
    converged: bool | None = None

    @property
    def key(self):
        """Ranking key: fewer false alarms, then fewer misses, then lower RMSE,
        then the larger xi (the sparser of two equally scored solutions)."""
        if self.report is None:
            return (math.inf, math.inf, math.inf, -self.xi)
        r = self.report
        rmse = math.inf if math.isnan(r.rmse) else r.rmse
        return (r.false_alarms, r.missed, round(rmse, 9), -self.xi)

    def to_dict(self):
        return {
            "xi": self.xi,
            "report": None if self.report is None else self.report.to_dict(),
            "error": self.error,
            "converged": None if self.converged is None else bool(self.converged),
        }


@dataclass(frozen=True)
class XiSearch:
    best_xi: float | None
    trials: tuple

    def to_dict(self):
        return {"best_xi": self.best_xi, "trials": [t.to_dict() for t in self.trials]}


def tune_xi(y, dictionary, truth, xi_grid, threshold_db=THRESHOLD_DB,
            match_radius=MATCH_RADIUS, threads=1, **solver_opts):
    """Exhaustive search over ``xi_grid`` for the CS regularization weight.

    Each xi runs :func:`doa_cs` on the same snapshot; solver errors are
    recorded in that row and the search continues. The best xi minimizes
    ``(false_alarms, missed, rmse)`` lexicographically; ties go to the
    largest xi.
    """
    grid = [float(x) for x in xi_grid]
    if not grid:
        raise ValueError("xi_grid must not be empty")

    def one(xi):
        try:
            res = doa_cs(y, dictionary, xi, **solver_opts)
        except (MimoDoaError, ValueError) as exc:
            return XiTrial(xi, None, f"{type(exc).__name__}: {exc}")
        rep = evaluate(find_peaks(res.spectrum, threshold_db), truth, match_radius)
        return XiTrial(xi, rep, None, res.converged)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            trials = tuple(pool.map(one, grid))
    else:
        trials = tuple(one(xi) for xi in grid)
    ok = [t for t in trials if t.report is not None]
    best = min(ok, key=lambda t: t.key).xi if ok else None
    return XiSearch(best, trials)
