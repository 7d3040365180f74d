"""Frequency-domain change-point detection for time series with evolving spectra."""

__version__ = "0.1.0"

from .blocks import (BlockIndexSet, block_average, block_set, lr_sets,
                     lrv_estimate)
from .config import (FrequencyGrid, SpectralConfig, TimeSeries,
                     build_frequency_grid, default_config)
from .detect import (ChangePointSet, algorithm1, d_stat, estimate_theta,
                     psi_threshold, single_break)
from .errors import (AlgorithmError, ConfigError, DegenerateDenominatorError,
                     DegenerateVarianceError, EvospecError, GridError,
                     NumericsError, ParseError, SizeError)
from .simulate import DgpSpec, simulate, theoretical_spectrum
from .spectral import (LocalSpectrum, TaperWindow, local_dft, local_periodogram,
                       smooth_local_periodogram, spectrum_field)
from .stats import (TestReport, critical_value, gamma_mt, r_dmax, r_max,
                    s_dmax, s_max)

__all__ = [
    "AlgorithmError", "BlockIndexSet", "ChangePointSet", "ConfigError",
    "DegenerateDenominatorError", "DegenerateVarianceError", "DgpSpec",
    "EvospecError", "FrequencyGrid", "GridError", "LocalSpectrum",
    "NumericsError", "ParseError", "SizeError", "SpectralConfig",
    "TaperWindow", "TestReport", "TimeSeries", "algorithm1", "block_average",
    "block_set", "build_frequency_grid", "critical_value", "d_stat",
    "default_config", "estimate_theta", "gamma_mt", "local_dft",
    "local_periodogram", "lr_sets", "lrv_estimate", "psi_threshold", "r_dmax",
    "r_max", "s_dmax", "s_max", "simulate", "single_break",
    "smooth_local_periodogram", "spectrum_field", "theoretical_spectrum",
]
