"""Declarative experiment runner, aggregation, fits and file output."""

from .analysis import (AsymmetryResult, EnsembleSummary, ScalingFit, asymmetry_metric, eta_chord, eta_of,
                       fit_scaling, fit_xy, summarize)
from .config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .emit import emit, load_schema, read_records, write_records
from .runner import NumericalGuardError, run_ensemble, run_trajectory
