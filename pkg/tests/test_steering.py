import numpy as np
import pytest

from mimo_doa.doa import build_dictionary, default_grid, steering_matrix, steering_vector
from mimo_doa.errors import DomainError

from conftest import MRA_POSITIONS


def test_boresight_all_ones():
    pos = np.random.default_rng(0).uniform(-5, 5, (7, 2))
    np.testing.assert_allclose(steering_vector(0.0, 0.0, pos), np.ones(7), atol=1e-15)


def test_ula_thirty_degrees():
    pos = np.column_stack([np.arange(8) / 2, np.zeros(8)])  # lambda/2 spacing, in wavelengths
    a = steering_vector(30.0, 0.0, pos)
    np.testing.assert_allclose(a, np.exp(1j * np.arange(8) * np.pi / 2), atol=1e-12)


def test_upa_kronecker():
    # element order: vertical index outer, horizontal inner -> a(v) kron a(u)
    d = 0.5
    pos = np.array([[h * d, v * d] for v in range(2) for h in range(2)])
    az, el = 23.0, -11.0
    u = np.sin(np.radians(az)) * np.cos(np.radians(el))
    v = np.sin(np.radians(el))
    a_u = np.exp(2j * np.pi * d * np.arange(2) * u)
    a_v = np.exp(2j * np.pi * d * np.arange(2) * v)
    np.testing.assert_allclose(steering_vector(az, el, pos), np.kron(a_v, a_u), atol=1e-12)


def test_out_of_domain():
    with pytest.raises(DomainError):
        steering_vector(91.0, 0.0, MRA_POSITIONS)


def test_single_grid_point():
    d = build_dictionary([0.0], MRA_POSITIONS, 2.0)
    np.testing.assert_allclose(d.matrix, np.ones((4, 1)), atol=1e-15)


def test_mra_dictionary_columns():
    grid = default_grid()
    assert grid.size == 1801 and grid[0] == -90 and grid[-1] == 90
    d = build_dictionary(grid, MRA_POSITIONS, 2.0, normalize=True)
    assert d.matrix.shape == (4, 1801)
    np.testing.assert_allclose(np.linalg.norm(d.matrix, axis=0), 1.0, atol=1e-12)
    raw = build_dictionary(grid, MRA_POSITIONS, 2.0)
    np.testing.assert_allclose(np.linalg.norm(raw.matrix, axis=0), 2.0, atol=1e-12)


def test_symmetric_angles_conjugate():
    pos = np.column_stack([np.arange(6.0), np.zeros(6)])
    d = build_dictionary([-17.3, 17.3], pos, 2.0, axis="azimuth")
    np.testing.assert_allclose(d.matrix[:, 0], d.matrix[:, 1].conj(), atol=1e-12)


def test_two_d_grid():
    grid = np.array([[az, el] for az in (-10.0, 0.0, 10.0) for el in (-5.0, 5.0)])
    pos = np.array([[h, v] for v in range(2) for h in range(3)], float) / 2
    d = build_dictionary(grid, pos)
    assert d.axis is None and d.matrix.shape == (6, 6)
    np.testing.assert_allclose(d.matrix, steering_matrix(grid[:, 0], grid[:, 1], pos), atol=0)


def test_unsorted_grid_rejected():
    with pytest.raises(ValueError):
        build_dictionary([1.0, 0.0], MRA_POSITIONS)
