"""Direction-of-arrival estimation: steering, estimators, solver, scoring."""

from .estimators import (CsResult, compensate_tdm_doppler, doa_cs, doa_fft, doa_music,
                         hermitian_eig, noise_subspace, sample_covariance)
from .evaluation import EstimatorReport, XiSearch, XiTrial, evaluate, pooled_rmse, tune_xi
from .spectrum import AngularSpectrum, PeakSet, find_peaks
from .sqrt_lasso import SqrtLassoResult, kkt_residual, sqrt_lasso
from .steering import (AZIMUTH, ELEVATION, SteeringDictionary, build_dictionary, default_grid,
                       steering_matrix, steering_vector)

__all__ = [
    "AZIMUTH", "ELEVATION", "AngularSpectrum", "CsResult", "EstimatorReport", "PeakSet",
    "SqrtLassoResult", "SteeringDictionary", "XiSearch", "XiTrial", "build_dictionary",
    "compensate_tdm_doppler", "default_grid", "doa_cs", "doa_fft", "doa_music", "evaluate",
    "find_peaks", "hermitian_eig", "kkt_residual", "noise_subspace", "pooled_rmse",
    "sample_covariance", "sqrt_lasso", "steering_matrix", "steering_vector", "tune_xi",
]
