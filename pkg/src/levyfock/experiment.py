"""Experiment facade: wires a config to a jump measure, its coefficients, a grid and test functions."""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import asdict
from pathlib import Path
from typing import Any

import numpy as np

from levyfock.config import ExperimentConfig, FunctionSpec, GridSpec, MeasureSpec, parse_config
from levyfock.constants import DEFAULT_GAMMA_CUTOFF, DEFAULT_GAMMA_NODES, DEFAULT_PASCAL_TERMS
from levyfock.enums import DiscretizationRule, FunctionPreset, GridPreset, MeasureKind, MeasurePreset
from levyfock.exceptions import ConfigError
from levyfock.extfock import Composition, enumerate_compositions, k_alpha
from levyfock.grid import FieldFunction, SpaceGrid
from levyfock.measure import (
    LevyModel,
    gamma,
    normalize,
    nu_tilde_from_nu,
    pascal,
    poisson,
    three_point_asymmetric,
    two_point_symmetric,
)
from levyfock.orthopoly import GaussQuadrature, JacobiCoeffs, golub_welsch, stieltjes
from levyfock.verify import MomentReport, VerificationReport, inputs_digest, moment_reports, property_suite

logger = logging.getLogger(__name__)


def _number(params: Mapping[str, str], name: str, default: float) -> float:
    raw = params.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as e:
        raise ConfigError(f"experiment/measure/param[{name}]", f"expected a number, got {raw!r}") from e


def _count(params: Mapping[str, str], name: str, default: int) -> int:
    raw = params.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"experiment/measure/param[{name}]", f"expected an integer, got {raw!r}") from e


def _triple(params: Mapping[str, str], name: str, default: Sequence[float]) -> tuple[float, float, float]:
    raw = params.get(name)
    try:
        values = [float(token) for token in raw.split()] if raw is not None else list(default)
    except ValueError as e:
        raise ConfigError(f"experiment/measure/param[{name}]", f"expected numbers, got {raw!r}") from e
    if len(values) != 3:
        raise ConfigError(f"experiment/measure/param[{name}]", f"expected three numbers, got {len(values)}")
    return values[0], values[1], values[2]


def build_model(spec: MeasureSpec) -> LevyModel:
    """
    The probability-normalized jump measure of a config; ``scale`` holds its total mass c.

    Raises
    ------
    ConfigError
        If a preset parameter cannot be converted.
    MeasureError
        If the resulting atoms are invalid.
    """
    if spec.preset is None:
        if spec.kind is MeasureKind.NU:
            return nu_tilde_from_nu(spec.atoms)
        model, _ = normalize(LevyModel.from_atoms(spec.atoms))
        return model

    params = spec.params
    match spec.preset:
        case MeasurePreset.TWO_POINT_SYMMETRIC:
            return two_point_symmetric(_number(params, "jump", 1.0))
        case MeasurePreset.THREE_POINT_ASYMMETRIC:
            return three_point_asymmetric(
                _triple(params, "jumps", (-1.0, 1.0, 2.0)), _triple(params, "weights", (0.2, 0.5, 0.3))
            )
        case MeasurePreset.GAMMA:
            rule = params.get("rule", DiscretizationRule.GAUSS_LAGUERRE)
            try:
                chosen = DiscretizationRule(rule)
            except ValueError as e:
                raise ConfigError("experiment/measure/param[rule]", f"unknown rule {rule!r}") from e
            return gamma(
                _count(params, "nodes", DEFAULT_GAMMA_NODES),
                rate=_number(params, "rate", 1.0),
                rule=chosen,
                cutoff=_number(params, "cutoff", DEFAULT_GAMMA_CUTOFF),
            )
        case MeasurePreset.POISSON:
            return poisson(_number(params, "jump", 1.0), _number(params, "intensity", 1.0))
        case MeasurePreset.PASCAL:
            return pascal(_number(params, "q", 0.5), _count(params, "terms", DEFAULT_PASCAL_TERMS))


def build_grid(spec: GridSpec, scale: float) -> SpaceGrid:
    """The grid of a config with weights multiplied by the measure scale c."""
    if spec.preset is None:
        return SpaceGrid.from_weights(list(spec.weights), sigma_scale=scale)
    if spec.preset is GridPreset.SINGLE_POINT:
        return SpaceGrid.single_point(spec.mass, sigma_scale=scale)
    return SpaceGrid.uniform(spec.points, spec.mass, sigma_scale=scale)


def build_functions(
    specs: Sequence[FunctionSpec], grid: SpaceGrid, rng: np.random.Generator
) -> dict[str, FieldFunction]:
    """Named test functions; random presets draw from ``rng`` in config order."""
    functions: dict[str, FieldFunction] = {}
    for spec in specs:
        if spec.values is not None:
            if len(spec.values) != grid.size:
                raise ConfigError(
                    f"experiment/functions/function[{spec.name}]@values",
                    f"{len(spec.values)} values for a grid of {grid.size} points",
                )
            functions[spec.name] = FieldFunction(grid, np.asarray(spec.values))
        elif spec.preset is FunctionPreset.RANDOM:
            functions[spec.name] = FieldFunction.random(grid, rng)
        else:
            functions[spec.name] = FieldFunction.constant(grid, spec.value)
    return functions


class Experiment:
    """
    A configured experiment.

    Parameters
    ----------
    config : ExperimentConfig
        A validated config.

    Attributes
    ----------
    model : LevyModel
        Normalized jump measure.
    coeffs : JacobiCoeffs
        Its recurrence coefficients to the requested Jacobi order N.
    field_coeffs : JacobiCoeffs
        The coefficients the Fock operators use, extended to the ℓ₂ truncation K when N < K.
    grid : SpaceGrid
        Space grid with weights scaled by c.
    functions : dict[str, FieldFunction]
        Named test functions.

    Examples
    --------
    >>> experiment = Experiment.from_file("configs/two_point.xml")
    >>> experiment.moment_table()["one"][4].oracle
    4.0
    """

    def __init__(self, config: ExperimentConfig) -> None:
        self.config = config
        self.model = build_model(config.measure)
        truncation = config.truncation
        self.coeffs: JacobiCoeffs = stieltjes(self.model, truncation.jacobi)
        self.field_coeffs = self.coeffs
        if truncation.jacobi < truncation.ell and not self.coeffs.terminated:
            logger.debug(
                "Extending the recurrence from %d to %d levels for the Fock operators",
                truncation.jacobi,
                truncation.ell,
            )
            self.field_coeffs = stieltjes(self.model, truncation.ell)
        self.grid = build_grid(config.grid, self.model.scale)
        self.functions = build_functions(config.functions, self.grid, np.random.default_rng(config.seed))
        logger.debug(
            "Experiment with %d atoms, %d grid points, %d functions",
            self.model.support_size,
            self.grid.size,
            len(self.functions),
        )

    @classmethod
    def from_file(cls, file_path: str | Path) -> "Experiment":
        return cls(parse_config(file_path))

    @property
    def n_max(self) -> int:
        return self.config.truncation.levels

    @property
    def ell(self) -> int:
        return self.config.truncation.ell

    def coefficient_table(self) -> list[tuple[int, float, float]]:
        """Rows (n, aₙ, bₙ) for the stored levels, with b₀ = 0."""
        return [(n, self.coeffs.a_at(n), self.coeffs.b_at(n)) for n in range(self.coeffs.order)]

    def quadrature(self) -> GaussQuadrature:
        return golub_welsch(self.coeffs)

    def gram_table(self) -> list[tuple[Composition, float]]:
        """(α, K_α) for every composition of weight 0 … n_max."""
        return [
            (alpha, k_alpha(alpha, self.field_coeffs))
            for n in range(self.n_max + 1)
            for alpha in enumerate_compositions(n)
        ]

    def moment_table(self) -> dict[str, list[MomentReport]]:
        """Vacuum moments of orders 0 … n_max for every test function."""
        return {
            name: moment_reports(phi, self.model, self.field_coeffs, self.n_max, ell=self.ell)
            for name, phi in self.functions.items()
        }

    def inputs(self) -> dict[str, Any]:
        """The resolved experiment inputs, as recorded in reports."""
        return {
            "atoms": [list(atom) for atom in self.model.atoms],
            "scale": self.model.scale,
            "grid": self.grid.weights.tolist(),
            "functions": {name: phi.values.tolist() for name, phi in self.functions.items()},
            "truncation": asdict(self.config.truncation),
            "tolerances": asdict(self.config.tolerances),
            "seed": self.config.seed,
        }

    def verify(self) -> VerificationReport:
        preset = self.config.measure.preset
        return property_suite(
            self.model,
            self.field_coeffs,
            self.functions,
            n_max=self.n_max,
            ell=self.ell,
            tolerances=self.config.tolerances,
            seed=self.config.seed,
            digest=inputs_digest(self.inputs()),
            meixner=preset is not None and preset.meixner,
        )
