"""Driven Jaynes-Cummings model: closed-form dynamics and brute-force oracles."""

from .analytic import SeriesConfig, inversion_series, mean_photon_series, solve_state
from .hilbert import FockSpace
from .model import DrivenParams, InitialCondition, params_from_free, standard_params

__version__ = "0.1.0"

__all__ = [
    "DrivenParams",
    "FockSpace",
    "InitialCondition",
    "SeriesConfig",
    "inversion_series",
    "mean_photon_series",
    "params_from_free",
    "solve_state",
    "standard_params",
]
