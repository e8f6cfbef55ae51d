"""FMCW TDM-MIMO radar simulation and DoA estimation on non-uniform virtual arrays."""

__version__ = "0.1.0"

from .errors import (BadLength, ConfigError, ConfigMismatch, ConvergenceError, DimensionMismatch,
                     DomainError, EmptySelection, FormatError, MimoDoaError, NonUniformSubarray,
                     RankError, SolverDiverged)
from .geometry import (BOTTOM_ROW, HORIZONTAL_SPARSE, VERTICAL_MRA, AntennaLayout, Subarray,
                       SubarraySelector, VirtualArray, load_layout, select_subarray,
                       synthesize_virtual_array)
from .scene import DataCube, PointTarget, Scene, snapshot, synthesize_cube
from .waveform import TESTBED_CONFIG, DerivedMetrics, WaveformConfig, derive_metrics
