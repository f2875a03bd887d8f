"""Statistical characterization and stochastic modelling of wind turbine power.

The package is organised by task:

``series``       time-series containers, increments and standardization
``cleansing``    rule-based invalidation of implausible SCADA records
``analysis``     histograms, autocorrelation, spectra, increment statistics
``dfa``          detrended fluctuation analysis and crossover fitting
``fgn``          exact fractional Gaussian noise sampling
``model``        bistable Langevin model with curtailment clipping
``calibration``  parameter estimation for the model
``io`` / ``cli`` CSV/JSON exchange and the command line
"""

from .errors import (
    CapacityExceededError,
    ConfigError,
    DataError,
    DegenerateSeriesError,
    InsufficientDataError,
    WindStochError,
)
from .series import IncrementSeries, TurbineSeries, increments, standardize

__version__ = "0.1.0"

__all__ = [
    "CapacityExceededError",
    "ConfigError",
    "DataError",
    "DegenerateSeriesError",
    "IncrementSeries",
    "InsufficientDataError",
    "TurbineSeries",
    "WindStochError",
    "increments",
    "standardize",
]
