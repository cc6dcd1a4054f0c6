"""
levyfock - Jacobi fields of Lévy processes in truncated Fock spaces.

The field of a Lévy white noise is realized twice: in the extended Fock space indexed by
compositions, and in the symmetric Fock space over ℓ₂ ⊗ L²(X, σ). Both realizations are
built at finite truncation and compared through their vacuum moments and the cumulants
of the noise.

Examples
--------
>>> from levyfock import Experiment
>>> from levyfock.config import ExperimentConfig
>>>
>>> experiment = Experiment(ExperimentConfig())
>>> experiment.coefficient_table()
[(0, 0.0, 0.0), (1, 0.0, 1.0)]
>>> report = experiment.verify()
>>> report.passed
True
"""

from levyfock.enums import MeasurePreset, OperatorPart, Representation
from levyfock.exceptions import (
    ConfigError,
    GridMismatchError,
    LevyFockError,
    MeasureError,
    OracleError,
    QuadratureError,
    SupportExhaustedError,
    TruncationError,
)
from levyfock.experiment import Experiment
from levyfock.measure import LevyModel, nu_tilde_from_nu
from levyfock.orthopoly import JacobiCoeffs, golub_welsch, stieltjes

__all__ = [
    "ConfigError",
    "Experiment",
    "GridMismatchError",
    "JacobiCoeffs",
    "LevyFockError",
    "LevyModel",
    "MeasureError",
    "MeasurePreset",
    "OperatorPart",
    "OracleError",
    "QuadratureError",
    "Representation",
    "SupportExhaustedError",
    "TruncationError",
    "golub_welsch",
    "nu_tilde_from_nu",
    "stieltjes",
]

__version__ = "0.1.0"
