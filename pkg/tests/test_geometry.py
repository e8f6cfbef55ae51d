import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mimo_doa.errors import EmptySelection
from mimo_doa.geometry import (HORIZONTAL, VERTICAL, AntennaLayout, SubarraySelector,
                               load_layout, save_layout, select_subarray,
                               synthesize_virtual_array)


def _as_set(points):
    return {tuple(np.round(p, 6)) for p in points}


def test_point_tx_is_identity():
    lay = AntennaLayout([[0, 0]], [[0, 0], [1, 0], [2, 0], [3, 0]])
    va = synthesize_virtual_array(lay)
    assert _as_set(va.elements) == {(0, 0), (1, 0), (2, 0), (3, 0)}
    assert va.overlap_count == 0


def test_two_tx_spaced_by_rx_count_gives_ula():
    lay = AntennaLayout([[0, 0], [4, 0]], [[0, 0], [1, 0], [2, 0], [3, 0]])
    va = synthesize_virtual_array(lay)
    assert _as_set(va.elements) == {(h, 0) for h in range(8)}
    assert va.overlap_count == 0


def test_overlapping_pairs_recorded():
    lay = AntennaLayout([[0, 0], [1, 0]], [[0, 0], [1, 0]])
    va = synthesize_virtual_array(lay)
    assert va.size == 3 and va.overlap_count == 1
    i = int(np.flatnonzero(np.all(va.elements == [1, 0], axis=1))[0])
    assert set(va.provenance[i]) == {(0, 1), (1, 0)}


def test_provenance_sums(va, layout):
    for el, prov in zip(va.elements, va.provenance):
        for t, r in prov:
            np.testing.assert_allclose(layout.tx_positions[t] + layout.rx_positions[r], el)


def test_bundled_counts(va):
    assert va.num_pairs == 192
    assert va.size + va.overlap_count == 192
    assert va.size == 134


def test_bottom_row_is_86_ula(bottom_row):
    assert bottom_row.size == 86
    assert bottom_row.is_uniform()
    np.testing.assert_allclose(bottom_row.spacing, 1.0)


def test_vertical_mra(mra):
    np.testing.assert_allclose(mra.positions_1d, [0, 1, 4, 6])
    assert mra.aperture_wavelengths == 3.0
    np.testing.assert_allclose(mra.lags(), np.arange(1, 7))
    assert not mra.is_uniform()


def test_sparse_horizontal_row(sparse_row):
    assert sparse_row.size == 16
    assert sparse_row.aperture_wavelengths == 26.5


def test_bundled_horizontal_aperture(va):
    h = va.elements[:, 0]
    assert (h.max() - h.min()) / 2 == 42.5


def test_single_match_is_empty_selection():
    lay = AntennaLayout([[0, 0]], [[0, 0], [1, 0], [2, 0]])
    va = synthesize_virtual_array(lay)
    with pytest.raises(EmptySelection):
        select_subarray(va, SubarraySelector(HORIZONTAL, 0.0, (1.5, 10)))
    with pytest.raises(EmptySelection):
        select_subarray(va, SubarraySelector(VERTICAL, 5.0))


def test_coincident_tx_rejected():
    with pytest.raises(ValueError):
        AntennaLayout([[0, 0], [0, 0.0005]], [[0, 0]])


def test_layout_roundtrip(tmp_path, layout):
    p = tmp_path / "lay.json"
    save_layout(layout, p)
    back = load_layout(p)
    np.testing.assert_array_equal(back.tx_positions, layout.tx_positions)
    np.testing.assert_array_equal(back.rx_positions, layout.rx_positions)


coords = st.lists(st.tuples(st.integers(-20, 20), st.integers(-5, 5)), min_size=1, max_size=6,
                  unique=True)


@given(coords, coords)
def test_convolution_symmetry(a, b):
    ab = synthesize_virtual_array(AntennaLayout(a, b))
    ba = synthesize_virtual_array(AntennaLayout(b, a))
    assert _as_set(ab.elements) == _as_set(ba.elements)
    assert ab.size + ab.overlap_count == len(a) * len(b)


@given(coords, coords, st.tuples(st.integers(-9, 9), st.integers(-9, 9)))
def test_translation(a, b, t):
    base = synthesize_virtual_array(AntennaLayout(a, b))
    moved = synthesize_virtual_array(AntennaLayout(np.array(a) + t, b))
    assert _as_set(moved.elements) == _as_set(base.elements + np.array(t))
