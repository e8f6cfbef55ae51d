"""FFT (Bartlett), MUSIC and compressive-sensing DoA estimators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, DimensionMismatch, RankError
from .spectrum import AngularSpectrum
from .sqrt_lasso import SqrtLassoResult, sqrt_lasso

DEFAULT_XI = 1.4
LOADING = 1e-6


def _as_snapshots(y, dictionary):
    Y = np.asarray(y, complex)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.ndim != 2 or Y.shape[0] != dictionary.num_elements:
        raise DimensionMismatch(
            f"snapshot has {Y.shape[0] if Y.ndim else 0} elements, "
            f"dictionary has {dictionary.num_elements}")
    return Y


def doa_fft(y, dictionary):
    """Matched-filter (Bartlett) spectrum ``|a_g^H y|^2``.

    ``y`` may be one snapshot ``(V,)`` or several ``(V, L)``; power is then
    averaged over snapshots. On a uniform array this is the zero-padded
    spatial DFT sampled at the grid directions.
    """
    Y = _as_snapshots(y, dictionary)
    power = np.mean(np.abs(dictionary.matrix.conj().T @ Y) ** 2, axis=1)
    return AngularSpectrum.from_power(dictionary.grid, power, "fft")


def sample_covariance(snapshots, loading=LOADING):
    """``R = Y Y^H / L + delta I`` with ``delta = loading * tr(R) / V``."""
    Y = np.asarray(snapshots, complex)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[1] < 1:
        raise ValueError("need at least one snapshot")
    V, L = Y.shape
    R = Y @ Y.conj().T / L
    R = 0.5 * (R + R.conj().T)
    delta = loading * np.trace(R).real / V
    return R + delta * np.eye(V)


def hermitian_eig(R):
    """Ascending eigenvalues and orthonormal eigenvectors of Hermitian ``R``.

    Raises:
        ConvergenceError: LAPACK did not converge or the input is not finite.
    """
    R = np.asarray(R, complex)
    if not np.all(np.isfinite(R)):
        raise ConvergenceError("covariance has non-finite entries")
    try:
        w, U = np.linalg.eigh(R)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    return w, U


def noise_subspace(R, num_sources):
    """Eigenvectors of the ``V - K`` smallest eigenvalues of ``R``."""
    V = R.shape[0]
    if num_sources < 0:
        raise ValueError("num_sources must be >= 0")
    if num_sources >= V:
        raise RankError(f"K={num_sources} leaves no noise subspace with V={V} elements")
    _, U = hermitian_eig(R)
    return U[:, :V - num_sources]


def doa_music(snapshots, num_sources, dictionary, loading=LOADING):
    """MUSIC pseudo-spectrum ``1 / ||U_n^H a_g||^2``.

    Args:
        snapshots: ``(V, L)`` complex snapshots (``(V,)`` is one snapshot).
        num_sources: Assumed source count ``K`` (``0 <= K < V``).
        dictionary: Steering dictionary over the search grid.
        loading: Diagonal loading relative to ``tr(R) / V``.
    """
    Y = _as_snapshots(snapshots, dictionary)
    R = sample_covariance(Y, loading)
    Un = noise_subspace(R, num_sources)
    proj = np.sum(np.abs(Un.conj().T @ dictionary.matrix) ** 2, axis=0)
    if not np.any(R):
        return AngularSpectrum.from_power(dictionary.grid, np.zeros_like(proj), "music")
    power = 1.0 / np.maximum(proj, np.finfo(float).tiny)
    return AngularSpectrum.from_power(dictionary.grid, power, "music")


@dataclass(frozen=True)
class CsResult:
    """Sparse coefficients, their spectrum ``|x|^2`` in dB and the solver record."""

    x: np.ndarray
    spectrum: AngularSpectrum
    solver: SqrtLassoResult

    @property
    def converged(self):
        return self.solver.converged

    def to_dict(self):
        s = self.solver
        return {
            "objective": float(s.objective),
            "kkt_residual": float(s.kkt_residual),
            "iterations": int(s.iterations),
            "converged": bool(s.converged),
            "support_size": self.support_size,
        }

    @property
    def support_size(self):
        """Entries within 120 dB of the largest (the spectrum floor)."""
        mag = np.abs(self.x)
        if not mag.any():
            return 0
        return int(np.count_nonzero(mag >= 1e-6 * mag.max()))


def doa_cs(y, dictionary, xi=DEFAULT_XI, **solver_opts):
    """Square-root LASSO spectrum ``min xi ||x||_1 + ||A x - y||_2``.

    ``y`` is a single snapshot. Extra keyword arguments go to
    :func:`~mimo_doa.doa.sqrt_lasso.sqrt_lasso` (``tol``, ``kkt_tol``,
    ``max_iter``).
    """
    Y = _as_snapshots(y, dictionary)
    if Y.shape[1] != 1:
        raise DimensionMismatch("doa_cs takes a single snapshot")
    if not xi > 0:
        raise ValueError("xi must be positive")
    res = sqrt_lasso(dictionary.matrix, Y[:, 0], xi, **solver_opts)
    spec = AngularSpectrum.from_power(dictionary.grid, np.abs(res.x) ** 2, "cs")
    return CsResult(res.x, spec, res)


def compensate_tdm_doppler(snapshots, tx_slots, velocity_mps, cfg):
    """Remove the per-transmitter Doppler phase of a TDM-MIMO frame.

    A target at ``velocity_mps`` adds ``2 pi f_D t T_slot`` to channels fed by
    the transmitter firing in slot ``t``; this multiplies each element row
    by the conjugate phase. Optional pre-processing, off by default in the
    harness.
    """
    Y = np.asarray(snapshots, complex)
    slots = np.asarray(tx_slots, float)
    if slots.shape[0] != Y.shape[0]:
        raise DimensionMismatch("one transmitter slot per element is required")
    f_d = 2 * velocity_mps / cfg.wavelength
    phase = np.exp(-2j * np.pi * f_d * slots * cfg.slot_duration)
    return Y * (phase[:, None] if Y.ndim == 2 else phase)
