"""Antenna layouts, MIMO virtual arrays and subarray selection.

All coordinates are ``(horizontal, vertical)`` pairs expressed in units of
half a wavelength. A TDM-MIMO radar with transmitters at ``t_i`` and
receivers at ``r_j`` behaves like a receive-only array with elements at
every ``t_i + r_j``; coincident sums collapse onto one virtual element.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import EmptySelection

#: Two positions closer than this (half-wavelength units) are the same element.
POSITION_TOL = 1e-3

HORIZONTAL = "horizontal"
VERTICAL = "vertical"
_AXES = (HORIZONTAL, VERTICAL)


def _as_positions(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must be a list of (horizontal, vertical) pairs")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    arr.setflags(write=False)
    return arr


def _has_coincident(points, tol=POSITION_TOL):
    diff = np.abs(points[:, None, :] - points[None, :, :]).max(axis=2)
    np.fill_diagonal(diff, np.inf)
    return bool((diff <= tol).any())


@dataclass(frozen=True)
class AntennaLayout:
    """Physical TX and RX element positions.

    Attributes:
        tx_positions: ``(M_T, 2)`` array of transmitter coordinates.
        rx_positions: ``(M_R, 2)`` array of receiver coordinates.
        wavelength_m: Carrier wavelength used to convert to metres.
    """

    tx_positions: np.ndarray
    rx_positions: np.ndarray
    wavelength_m: float = 299_792_458.0 / 77e9

    def __post_init__(self):
        tx = _as_positions(self.tx_positions, "tx_positions")
        rx = _as_positions(self.rx_positions, "rx_positions")
        if _has_coincident(tx):
            raise ValueError("two TX positions coincide")
        if _has_coincident(rx):
            raise ValueError("two RX positions coincide")
        if not self.wavelength_m > 0:
            raise ValueError("wavelength_m must be positive")
        object.__setattr__(self, "tx_positions", tx)
        object.__setattr__(self, "rx_positions", rx)

    @property
    def num_tx(self):
        return self.tx_positions.shape[0]

    @property
    def num_rx(self):
        return self.rx_positions.shape[0]

    def to_dict(self):
        return {
            "wavelength_m": self.wavelength_m,
            "units": "half_wavelength",
            "tx": self.tx_positions.tolist(),
            "rx": self.rx_positions.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        units = data.get("units", "half_wavelength")
        if units != "half_wavelength":
            raise ValueError(f"unsupported units {units!r}; expected 'half_wavelength'")
        return cls(data["tx"], data["rx"], float(data["wavelength_m"]))


def load_layout(path=None):
    """Read a geometry JSON file; ``None`` loads the bundled cascaded layout."""
    if path is None or path == "bundled":
        text = resources.files("mimo_doa.data").joinpath("cascade_layout.json").read_text()
    else:
        text = Path(path).read_text()
    return AntennaLayout.from_dict(json.loads(text))


def save_layout(layout, path):
    Path(path).write_text(json.dumps(layout.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class VirtualArray:
    """Deduplicated virtual elements with the TX/RX pairs that produce them.

    Elements are ordered by vertical then horizontal coordinate.
    ``provenance[i]`` lists every ``(tx, rx)`` index pair whose position sum
    lands on element ``i``, in TX-major order.
    """

    elements: np.ndarray
    provenance: tuple
    num_tx: int
    num_rx: int

    @property
    def size(self):
        return self.elements.shape[0]

    @property
    def num_pairs(self):
        return self.num_tx * self.num_rx

    @property
    def overlap_count(self):
        return self.num_pairs - self.size

    @property
    def channel_pairs(self):
        """The first contributing ``(tx, rx)`` pair of every element.

        Simulated cubes carry one channel per virtual element, sampled
        through this pair (it fixes the TDM slot of the channel).
        """
        return tuple(p[0] for p in self.provenance)


def synthesize_virtual_array(layout):
    """Spatially convolve the TX and RX arrays of ``layout``."""
    sums = layout.tx_positions[:, None, :] + layout.rx_positions[None, :, :]
    flat = sums.reshape(-1, 2)
    pairs = [(t, r) for t in range(layout.num_tx) for r in range(layout.num_rx)]

    unique = []
    members = []
    for pos, pair in zip(flat, pairs):
        for k, u in enumerate(unique):
            if np.abs(u - pos).max() <= POSITION_TOL:
                members[k].append(pair)
                break
        else:
            unique.append(pos)
            members.append([pair])

    unique = np.array(unique)
    order = np.lexsort((unique[:, 0], unique[:, 1]))
    elements = unique[order]
    elements.setflags(write=False)
    provenance = tuple(tuple(members[k]) for k in order)
    return VirtualArray(elements, provenance, layout.num_tx, layout.num_rx)


@dataclass(frozen=True)
class SubarraySelector:
    """Declarative line selection inside a virtual array.

    ``axis`` names the direction the subarray extends along. ``at`` is the
    fixed off-axis coordinate (row height for a horizontal subarray, column
    position for a vertical one). ``span`` optionally bounds the on-axis
    coordinate, inclusive.
    """

    axis: str
    at: float
    span: tuple | None = None

    def __post_init__(self):
        if self.axis not in _AXES:
            raise ValueError(f"axis must be one of {_AXES}, got {self.axis!r}")
        if self.span is not None:
            lo, hi = self.span
            object.__setattr__(self, "span", (float(lo), float(hi)))

    @classmethod
    def from_dict(cls, data):
        return cls(data["axis"], float(data["at"]), data.get("span"))

    def to_dict(self):
        return {"axis": self.axis, "at": self.at, "span": None if self.span is None else list(self.span)}


#: Bottom row of the bundled layout: an 86-element half-wavelength ULA.
BOTTOM_ROW = SubarraySelector(HORIZONTAL, 0.0)
#: Vertical four-element minimum redundancy subarray of the bundled layout.
VERTICAL_MRA = SubarraySelector(VERTICAL, 11.0)
#: Sixteen-element non-uniform horizontal row of the bundled layout.
HORIZONTAL_SPARSE = SubarraySelector(HORIZONTAL, 1.0)


@dataclass(frozen=True)
class Subarray:
    """A collinear selection of virtual elements, sorted along ``axis``."""

    parent: VirtualArray = field(repr=False)
    indices: np.ndarray
    axis: str
    positions_1d: np.ndarray

    @property
    def size(self):
        return len(self.indices)

    @property
    def positions(self):
        """``(n, 2)`` element coordinates in half-wavelength units."""
        return self.parent.elements[self.indices]

    @property
    def positions_wavelengths(self):
        """``(n, 2)`` element coordinates in wavelengths."""
        return self.positions / 2.0

    @property
    def aperture(self):
        """Extent along the axis, in half-wavelength units."""
        return float(self.positions_1d[-1] - self.positions_1d[0])

    @property
    def aperture_wavelengths(self):
        return self.aperture / 2.0

    @property
    def spacing(self):
        return np.diff(self.positions_1d)

    def is_uniform(self, tol=POSITION_TOL):
        d = self.spacing
        return bool(np.all(np.abs(d - d[0]) <= tol))

    def lags(self):
        """Sorted set of distinct positive pairwise position differences."""
        p = self.positions_1d
        diff = np.abs(p[:, None] - p[None, :])
        return np.unique(np.round(diff[diff > POSITION_TOL], 6))


def select_subarray(va, selector):
    """Pick the elements of ``va`` lying on the line described by ``selector``.

    Raises:
        EmptySelection: fewer than two elements match.
    """
    along, across = (0, 1) if selector.axis == HORIZONTAL else (1, 0)
    pts = va.elements
    mask = np.abs(pts[:, across] - selector.at) <= POSITION_TOL
    if selector.span is not None:
        lo, hi = selector.span
        mask &= (pts[:, along] >= lo - POSITION_TOL) & (pts[:, along] <= hi + POSITION_TOL)
    idx = np.flatnonzero(mask)
    if idx.size < 2:
        raise EmptySelection(f"selector {selector} matched {idx.size} element(s); need at least 2")
    idx = idx[np.argsort(pts[idx, along], kind="stable")]
    pos = pts[idx, along].copy()
    idx.setflags(write=False)
    pos.setflags(write=False)
    return Subarray(va, idx, selector.axis, pos)
