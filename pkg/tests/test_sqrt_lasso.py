import numpy as np
import pytest

from mimo_doa.doa import build_dictionary, default_grid, kkt_residual, sqrt_lasso
from mimo_doa.doa.sqrt_lasso import objective, soft_threshold, zero_solution_bound

from conftest import MRA_POSITIONS

cp = pytest.importorskip("cvxpy")

SPARSE_ROW = np.array([[h, 1.0] for h in [9, 10, 11, 12, 20, 21, 22, 23, *range(55, 63)]])


def _reference(A, y, xi):
    x = cp.Variable(A.shape[1], complex=True)
    prob = cp.Problem(cp.Minimize(xi * cp.norm1(x) + cp.norm(A @ x - y, 2)))
    prob.solve(solver="CLARABEL")
    return prob.value


def _cases():
    rng = np.random.default_rng(11)
    grid = default_grid(step=0.5)
    mra = build_dictionary(grid, MRA_POSITIONS, 2.0).matrix
    row = build_dictionary(grid, SPARSE_ROW, 2.0, axis="azimuth").matrix
    out = []
    for name, A, xis in (("mra", mra, (1.4, 0.7, 0.2)), ("row", row, (3.0, 1.4, 0.5))):
        for xi in xis:
            for noise in (0.0, 0.1):
                i, j = rng.choice(A.shape[1], 2, replace=False)
                m = A.shape[0]
                y = A[:, i] + np.exp(2j * np.pi * rng.random()) * A[:, j]
                y = y + noise * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
                out.append(pytest.param(A, y, xi, id=f"{name}-xi{xi}-n{noise}"))
    return out


@pytest.mark.parametrize("A,y,xi", _cases())
def test_matches_conic_reference(A, y, xi):
    res = sqrt_lasso(A, y, xi)
    ref = _reference(A, y, xi)
    assert res.converged and res.kkt_residual <= 1e-5
    # a KKT residual of 1e-5 (relative to 1 + ||y||) bounds the objective gap
    # at the 1e-4 level; the reference solve itself is good to about 1e-6
    assert abs(res.objective - ref) <= 1e-4 * max(1.0, ref)
    h = np.asarray(res.history)
    assert np.all(np.diff(h) <= 1e-12 * np.abs(h[:-1]))


def test_zero_observation():
    A = build_dictionary(default_grid(), MRA_POSITIONS, 2.0).matrix
    res = sqrt_lasso(A, np.zeros(4), 1.0)
    assert not np.any(res.x) and res.converged


def test_zero_solution_above_bound():
    rng = np.random.default_rng(3)
    A = build_dictionary(default_grid(), MRA_POSITIONS, 2.0).matrix
    for _ in range(20):
        y = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        res = sqrt_lasso(A, y, zero_solution_bound(A, y) * 1.0001)
        assert np.sum(np.abs(res.x)) <= 1e-8
        assert res.kkt_residual <= 1e-12


def test_below_bound_is_nonzero():
    A = build_dictionary(default_grid(), MRA_POSITIONS, 2.0).matrix
    y = A[:, 900] + 0.3 * A[:, 400]
    res = sqrt_lasso(A, y, zero_solution_bound(A, y) * 0.9)
    assert np.sum(np.abs(res.x)) > 1e-3
    assert res.objective < objective(A, y, np.zeros(A.shape[1]), zero_solution_bound(A, y) * 0.9)


def test_kkt_residual_detects_suboptimal():
    A = build_dictionary(default_grid(step=1.0), MRA_POSITIONS, 2.0).matrix
    y = A[:, 80] + 0.5j * A[:, 100]
    res = sqrt_lasso(A, y, 0.5)
    bad = res.x.copy()
    bad[10] += 0.3
    assert kkt_residual(A, y, bad, 0.5) > 100 * res.kkt_residual


def test_soft_threshold_complex():
    v = np.array([3 + 4j, 0.1j, -2.0])
    out = soft_threshold(v, 1.0)
    np.testing.assert_allclose(out, [(3 + 4j) * 0.8, 0.0, -1.0])


def test_rejects_nonpositive_xi():
    with pytest.raises(ValueError):
        sqrt_lasso(np.eye(2), np.ones(2), 0.0)


def test_unreachable_tolerance_is_reported():
    A = build_dictionary(default_grid(step=0.5), MRA_POSITIONS, 2.0).matrix
    rng = np.random.default_rng(2)
    y = A[:, 100] + A[:, 200] + 0.1 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
    loose = sqrt_lasso(A, y, 0.2)
    tight = sqrt_lasso(A, y, 0.2, kkt_tol=1e-14)
    assert loose.converged and not tight.converged
    assert tight.objective <= loose.objective + 1e-6 * loose.objective
    assert tight.kkt_residual < 1e-4


def test_max_iter_reported():
    A = build_dictionary(default_grid(step=0.5), SPARSE_ROW, 2.0, axis="azimuth").matrix
    rng = np.random.default_rng(9)
    y = A[:, 100] + 0.3 * (rng.standard_normal(16) + 1j * rng.standard_normal(16))
    res = sqrt_lasso(A, y, 0.5, max_iter=1, kkt_tol=1e-14)
    assert res.iterations <= 1 and not res.converged
    h = np.asarray(res.history)
    assert np.all(np.diff(h) <= 1e-12 * np.abs(h[:-1]))
