import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mimo_doa.doa import (AngularSpectrum, PeakSet, build_dictionary, default_grid, evaluate,
                          find_peaks, pooled_rmse, steering_vector, tune_xi)

from conftest import MRA_POSITIONS


def _spec(power, grid=None):
    power = np.asarray(power, float)
    grid = np.arange(power.size, dtype=float) if grid is None else grid
    return AngularSpectrum.from_power(grid, power)


def _peaks(angles, powers=None):
    angles = np.asarray(angles, float)
    powers = np.zeros(angles.size) if powers is None else np.asarray(powers, float)
    return PeakSet(angles, powers, -6.0)


def test_monotone_single_peak():
    p = find_peaks(_spec(np.linspace(0.1, 1, 50)))
    assert len(p) == 1 and p.angles[0] == 49


def test_plateau_leftmost():
    p = find_peaks(_spec([0.1, 0.5, 1.0, 1.0, 1.0, 0.2]))
    assert list(p.indices) == [2]


def test_constant_has_no_peak():
    assert len(find_peaks(_spec(np.ones(10)))) == 0


def test_threshold_and_order():
    p = find_peaks(_spec([0.0, 1.0, 0.0, 0.5, 0.0, 0.1, 0.0]), -6.0)
    assert list(p.angles) == [1.0, 3.0]  # 0.1 is -10 dB
    assert p.powers_db[0] == 0.0 and p.powers_db[1] == pytest.approx(-3.0103, abs=1e-4)


def test_two_d_raster_peaks():
    az = np.arange(-2.0, 3.0)
    el = np.arange(-1.0, 2.0)
    grid = np.array([[a, e] for a in az for e in el])
    power = np.exp(-((grid[:, 0] - 1) ** 2 + grid[:, 1] ** 2))
    power[0] = 0.9  # corner (-2, -1)
    p = find_peaks(AngularSpectrum.from_power(grid, power), -6.0)
    np.testing.assert_allclose(p.angles, [[1.0, 0.0], [-2.0, -1.0]])


def test_two_d_requires_raster():
    grid = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.5]])
    with pytest.raises(ValueError):
        find_peaks(AngularSpectrum.from_power(grid, [1.0, 2.0, 1.0]))


@given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=60),
       st.floats(-30, 0))
def test_peak_invariants(values, thr):
    s = _spec(values)
    p = find_peaks(s, thr)
    assert np.all(p.powers_db >= thr)
    assert np.all(np.diff(p.powers_db) <= 0)
    for k in p.indices:
        v = s.power_db
        assert (k == 0 or v[k - 1] < v[k]) and all(v[j] <= v[k] for j in (k - 1, k + 1)
                                                   if 0 <= j < len(v))


def test_evaluate_exact():
    rep = evaluate(_peaks([-6.0, 5.0]), [-6.0, 5.0])
    assert rep.rmse == 0.0 and rep.false_alarms == 0 and rep.resolved


def test_evaluate_rmse_arithmetic():
    rep = evaluate(_peaks([-6.3, 5.1]), [-6.0, 5.0], 2.0)
    assert rep.rmse == pytest.approx(0.2236067977, abs=1e-9)
    assert rep.errors == pytest.approx((-0.3, 0.1))


def test_evaluate_false_alarms():
    rep = evaluate(_peaks([-6.0, 5.0, 30.0, -31.0, 55.0, -57.0, 88.0]), [-6.0, 5.0])
    assert rep.false_alarms == 5 and rep.resolved


def test_evaluate_greedy_nearest():
    # peak 0.9 is closest to truth 1.0; peak 0.0 then goes to truth -1.0
    rep = evaluate(_peaks([0.0, 0.9]), [-1.0, 1.0], 2.0)
    assert rep.errors == pytest.approx((1.0, -0.1))
    assert rep.false_alarms == 0


def test_evaluate_missed():
    rep = evaluate(_peaks([0.0]), [-6.0, 5.0])
    assert rep.missed == 2 and not rep.resolved and math.isnan(rep.rmse)
    assert rep.to_dict()["rmse_deg"] is None


def test_evaluate_radius_validation():
    with pytest.raises(ValueError):
        evaluate(_peaks([0.0]), [0.0], 0.0)


def test_pooled_rmse_order_free():
    reps = [evaluate(_peaks([0.1 * k, 10.0]), [0.0, 10.2]) for k in range(5)]
    assert pooled_rmse(reps) == pooled_rmse(reps[::-1])
    sq = [e * e for r in reps for e in r.errors]
    assert pooled_rmse(reps) == pytest.approx(math.sqrt(sum(sq) / len(sq)))


@pytest.fixture(scope="module")
def two_target_case():
    d = build_dictionary(default_grid(), MRA_POSITIONS, 2.0)
    a = lambda t: steering_vector(0.0, t, MRA_POSITIONS / 2)
    return a(-6.0) + np.exp(0.4j) * a(5.0), d


def test_tune_singleton(two_target_case):
    y, d = two_target_case
    assert tune_xi(y, d, [-6.0, 5.0], [1.4]).best_xi == 1.4


def test_tune_above_bound_misses(two_target_case):
    y, d = two_target_case
    bound = np.max(np.abs(d.matrix.conj().T @ y)) / np.linalg.norm(y)
    search = tune_xi(y, d, [-6.0, 5.0], [0.8, bound + 0.1])
    row = search.trials[1]
    assert row.report.missed == 2
    assert search.best_xi == 0.8


def test_tune_threads_match(two_target_case):
    y, d = two_target_case
    grid = [0.3, 0.9, 1.2]
    a = tune_xi(y, d, [-6.0, 5.0], grid)
    b = tune_xi(y, d, [-6.0, 5.0], grid, threads=3)
    assert a.to_dict() == b.to_dict()


def test_tune_records_errors(two_target_case):
    y, d = two_target_case
    search = tune_xi(y, d, [-6.0, 5.0], [-1.0, 1.0])
    assert search.trials[0].report is None and "xi" in search.trials[0].error
    assert search.best_xi == 1.0


def test_tune_empty_grid(two_target_case):
    y, d = two_target_case
    with pytest.raises(ValueError):
        tune_xi(y, d, [0.0], [])
