"""Low-rank matrix approximation from bilateral random projections."""

from brp._backend import BACKEND
from brp._version import __version__
from brp.bounds import (BoundReport, average_bound, deterministic_bound, deviation_bound,
                        monte_carlo_check, power_average_bound, power_deterministic_bound)
from brp.errors import (BRPError, ConfigError, DegenerateSpectrumError, FormatError, HypothesisError,
                        NonFiniteError, ShapeError, SingularMatrixError)
from brp.lowrank import (BilateralSketch, LowRankFactors, SketchConfig, approximate,
                         approximation_error, bilateral_sketch, brp_approximate, materialize,
                         power_approximate, power_reconstruct, power_sketch, truncated_svd)
from brp.matrix import (SvdFactors, frobenius_norm, fractional_power_small, invert_small, matmul,
                        pinv, spectral_norm, svd_full, thin_qr, transpose)
from brp.randgen import derive_seed, gaussian_matrix

__all__ = [
    "BACKEND", "__version__",
    "BoundReport", "average_bound", "deterministic_bound", "deviation_bound", "monte_carlo_check",
    "power_average_bound", "power_deterministic_bound",
    "BilateralSketch", "LowRankFactors", "SketchConfig", "approximate", "approximation_error",
    "bilateral_sketch", "brp_approximate", "materialize", "power_approximate", "power_reconstruct",
    "power_sketch", "truncated_svd",
    "SvdFactors", "frobenius_norm", "fractional_power_small", "invert_small", "matmul", "pinv",
    "spectral_norm", "svd_full", "thin_qr", "transpose",
    "derive_seed", "gaussian_matrix",
    "BRPError", "ConfigError", "DegenerateSpectrumError", "FormatError", "HypothesisError", "NonFiniteError",
    "ShapeError", "SingularMatrixError",
]
