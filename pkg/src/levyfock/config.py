"""Parsing and validation of XML experiment configs."""

import logging
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from lxml import etree
from lxml.etree import _Element

from levyfock.constants import (
    DEFAULT_JACOBI_ORDER,
    DEFAULT_LEVELS,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_SEED,
    OUTPUT_DIR_ENV,
)
from levyfock.enums import FunctionPreset, GridPreset, MeasureKind, MeasurePreset
from levyfock.exceptions import ConfigError
from levyfock.measure import Atom
from levyfock.verify import Tolerances

logger = logging.getLogger(__name__)

PRESET_PARAMETERS: dict[MeasurePreset, frozenset[str]] = {
    MeasurePreset.TWO_POINT_SYMMETRIC: frozenset({"jump"}),
    MeasurePreset.THREE_POINT_ASYMMETRIC: frozenset({"jumps", "weights"}),
    MeasurePreset.GAMMA: frozenset({"nodes", "rate", "rule", "cutoff"}),
    MeasurePreset.POISSON: frozenset({"jump", "intensity"}),
    MeasurePreset.PASCAL: frozenset({"q", "terms"}),
}


@dataclass(frozen=True)
class MeasureSpec:
    """Either a named preset with string parameters or an explicit atom list."""

    preset: MeasurePreset | None = MeasurePreset.TWO_POINT_SYMMETRIC
    params: dict[str, str] = field(default_factory=dict)
    kind: MeasureKind = MeasureKind.NU_TILDE
    atoms: tuple[Atom, ...] = ()


@dataclass(frozen=True)
class GridSpec:
    """A preset grid or explicit point weights; weights are later scaled by c."""

    preset: GridPreset | None = GridPreset.SINGLE_POINT
    points: int = 1
    mass: float = 1.0
    weights: tuple[float, ...] = ()


@dataclass(frozen=True)
class FunctionSpec:
    """A named test function: explicit values or a preset."""

    name: str
    values: tuple[float, ...] | None = None
    preset: FunctionPreset = FunctionPreset.CONSTANT
    value: float = 1.0


@dataclass(frozen=True)
class Truncation:
    """
    Truncation orders.

    Parameters
    ----------
    jacobi : int
        Number N of recurrence levels.
    levels : int
        Fock level truncation n_max.
    ell : int
        ℓ₂ truncation K.
    """

    jacobi: int = DEFAULT_JACOBI_ORDER
    levels: int = DEFAULT_LEVELS
    ell: int = DEFAULT_LEVELS + 1


@dataclass(frozen=True)
class ExperimentConfig:
    """A complete experiment description."""

    measure: MeasureSpec = field(default_factory=MeasureSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    functions: tuple[FunctionSpec, ...] = (FunctionSpec("one"),)
    truncation: Truncation = field(default_factory=Truncation)
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = DEFAULT_SEED
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)


def parse_config(file_path: str | Path) -> ExperimentConfig:
    """
    Parse and validate an experiment config.

    Parameters
    ----------
    file_path : str | Path
        Path to the XML document.

    Returns
    -------
    ExperimentConfig
        The validated config, ℓ₂ truncation raised where needed.

    Raises
    ------
    ConfigError
        If the file is missing, is not well-formed XML, or a field is invalid.
    """
    path = Path(file_path)

    if not path.exists():
        raise ConfigError(str(file_path), "config file not found")

    if not path.is_file():
        raise ConfigError(str(file_path), "path is not a file")

    try:
        tree = etree.parse(str(path))
    except etree.XMLSyntaxError as e:
        raise ConfigError(str(file_path), f"invalid XML: {e}") from e

    return parse_element(tree.getroot())


def parse_string(text: str) -> ExperimentConfig:
    """Parse a config held in memory."""
    try:
        root = etree.fromstring(text.encode("utf-8"))
    except etree.XMLSyntaxError as e:
        raise ConfigError("experiment", f"invalid XML: {e}") from e
    return parse_element(root)


def parse_element(root: _Element) -> ExperimentConfig:
    if root.tag != "experiment":
        raise ConfigError(str(root.tag), "root element must be <experiment>")

    config = ExperimentConfig(
        seed=_integer(root, "seed", "experiment", DEFAULT_SEED),
    )

    measure = root.find("measure")
    if measure is not None:
        config = replace(config, measure=_parse_measure(measure))

    grid = root.find("grid")
    if grid is not None:
        config = replace(config, grid=_parse_grid(grid))

    functions = root.find("functions")
    if functions is not None:
        config = replace(config, functions=_parse_functions(functions))

    truncation = root.find("truncation")
    if truncation is not None:
        config = replace(config, truncation=_parse_truncation(truncation))

    tolerances = root.find("tolerances")
    if tolerances is not None:
        config = replace(config, tolerances=_parse_tolerances(tolerances))

    output = root.find("output")
    if output is not None:
        directory = output.get("dir")
        if not directory:
            raise ConfigError("experiment/output@dir", "missing directory")
        config = replace(config, output_dir=Path(directory))

    return validate(config)


def _integer(element: _Element, name: str, path: str, default: int) -> int:
    raw = element.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"{path}@{name}", f"expected an integer, got {raw!r}") from e


def _real(element: _Element, name: str, path: str, default: float) -> float:
    raw = element.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as e:
        raise ConfigError(f"{path}@{name}", f"expected a number, got {raw!r}") from e


def _reals(raw: str, path: str) -> tuple[float, ...]:
    try:
        return tuple(float(token) for token in raw.split())
    except ValueError as e:
        raise ConfigError(path, f"expected whitespace-separated numbers, got {raw!r}") from e


def _parse_measure(element: _Element) -> MeasureSpec:
    path = "experiment/measure"
    preset = element.get("preset")
    if preset is not None:
        try:
            chosen = MeasurePreset(preset)
        except ValueError as e:
            raise ConfigError(f"{path}@preset", f"unknown preset {preset!r}") from e
        params: dict[str, str] = {}
        for param in element.findall("param"):
            name = param.get("name")
            if name is None or name not in PRESET_PARAMETERS[chosen]:
                raise ConfigError(f"{path}/param@name", f"{name!r} is not a parameter of {chosen}")
            params[name] = (param.text or "").strip()
        return MeasureSpec(preset=chosen, params=params)

    kind = element.get("kind", MeasureKind.NU_TILDE)
    try:
        measure_kind = MeasureKind(kind)
    except ValueError as e:
        raise ConfigError(f"{path}@kind", f"unknown measure kind {kind!r}") from e
    atoms = tuple(
        (_real(atom, "s", f"{path}/atom", float("nan")), _real(atom, "w", f"{path}/atom", float("nan")))
        for atom in element.findall("atom")
    )
    if not atoms:
        raise ConfigError(path, "needs a preset or at least one <atom>")
    if any(math.isnan(s) or math.isnan(w) for s, w in atoms):
        raise ConfigError(f"{path}/atom", "every atom needs both s and w")
    return MeasureSpec(preset=None, kind=measure_kind, atoms=atoms)


def _parse_grid(element: _Element) -> GridSpec:
    path = "experiment/grid"
    points = element.findall("point")
    if points:
        weights = tuple(_real(point, "weight", f"{path}/point", float("nan")) for point in points)
        if any(math.isnan(w) or w <= 0.0 for w in weights):
            raise ConfigError(f"{path}/point@weight", "weights must be positive numbers")
        return GridSpec(preset=None, points=len(weights), weights=weights)

    preset = element.get("preset", GridPreset.SINGLE_POINT)
    try:
        chosen = GridPreset(preset)
    except ValueError as e:
        raise ConfigError(f"{path}@preset", f"unknown preset {preset!r}") from e
    count = _integer(element, "points", path, 1)
    mass = _real(element, "mass", path, 1.0)
    if chosen is GridPreset.SINGLE_POINT and count != 1:
        raise ConfigError(f"{path}@points", "a single_point grid has exactly one point")
    if count < 1:
        raise ConfigError(f"{path}@points", f"must be positive, got {count}")
    if mass <= 0.0:
        raise ConfigError(f"{path}@mass", f"must be positive, got {mass}")
    return GridSpec(preset=chosen, points=count, mass=mass)


def _parse_functions(element: _Element) -> tuple[FunctionSpec, ...]:
    path = "experiment/functions/function"
    specs: list[FunctionSpec] = []
    for function in element.findall("function"):
        name = function.get("name")
        if not name:
            raise ConfigError(f"{path}@name", "missing name")
        if any(spec.name == name for spec in specs):
            raise ConfigError(f"{path}@name", f"duplicate function {name!r}")
        values = function.get("values")
        if values is not None:
            specs.append(FunctionSpec(name=name, values=_reals(values, f"{path}@values")))
            continue
        preset = function.get("preset", FunctionPreset.CONSTANT)
        try:
            chosen = FunctionPreset(preset)
        except ValueError as e:
            raise ConfigError(f"{path}@preset", f"unknown preset {preset!r}") from e
        specs.append(FunctionSpec(name=name, preset=chosen, value=_real(function, "value", path, 1.0)))
    if not specs:
        raise ConfigError("experiment/functions", "at least one <function> is required")
    return tuple(specs)


def _parse_truncation(element: _Element) -> Truncation:
    path = "experiment/truncation"
    levels = _integer(element, "levels", path, DEFAULT_LEVELS)
    ell = _integer(element, "ell", path, levels + 1)
    jacobi = _integer(element, "jacobi", path, max(DEFAULT_JACOBI_ORDER, ell))
    return Truncation(jacobi=jacobi, levels=levels, ell=ell)


def _parse_tolerances(element: _Element) -> Tolerances:
    path = "experiment/tolerances"
    defaults = Tolerances()
    return Tolerances(
        relative=_real(element, "relative", path, defaults.relative),
        absolute=_real(element, "absolute", path, defaults.absolute),
        trials=_integer(element, "trials", path, defaults.trials),
    )


def validate(config: ExperimentConfig) -> ExperimentConfig:
    """
    Enforce the config invariants, raising a too small ℓ₂ truncation.

    The Jacobi order N is kept as given; it only sets the size of the reported recurrence
    tables, and the Fock operators extend the coefficients to K levels themselves.

    Raises
    ------
    ConfigError
        If a truncation is not positive or a tolerance is not positive.
    """
    truncation = config.truncation
    if truncation.levels < 1:
        raise ConfigError("experiment/truncation@levels", f"must be at least 1, got {truncation.levels}")
    if truncation.jacobi < 1:
        raise ConfigError("experiment/truncation@jacobi", f"must be at least 1, got {truncation.jacobi}")
    if truncation.ell < 1:
        raise ConfigError("experiment/truncation@ell", f"must be at least 1, got {truncation.ell}")

    ell = truncation.ell
    if ell < truncation.levels + 1:
        logger.warning("ℓ₂ truncation %d raised to %d (levels + 1)", ell, truncation.levels + 1)
        ell = truncation.levels + 1

    tolerances = config.tolerances
    if tolerances.relative <= 0.0:
        raise ConfigError("experiment/tolerances@relative", "must be positive")
    if tolerances.absolute <= 0.0:
        raise ConfigError("experiment/tolerances@absolute", "must be positive")
    if tolerances.trials < 1:
        raise ConfigError("experiment/tolerances@trials", "must be at least 1")

    return replace(config, truncation=Truncation(jacobi=truncation.jacobi, levels=truncation.levels, ell=ell))


def with_overrides(
    config: ExperimentConfig,
    *,
    levels: int | None = None,
    jacobi: int | None = None,
    ell: int | None = None,
    relative: float | None = None,
    seed: int | None = None,
    output_dir: str | Path | None = None,
) -> ExperimentConfig:
    """
    Merge command-line overrides and re-validate.

    A new ``levels`` without an explicit ``ell`` moves K along to ``levels + 1``. The output
    directory is taken from ``output_dir``, else from the ``LEVYFOCK_OUT_DIR`` environment
    variable, else from the config.
    """
    truncation = config.truncation
    if levels is not None:
        truncation = replace(truncation, levels=levels, ell=levels + 1 if ell is None else ell)
    if ell is not None:
        truncation = replace(truncation, ell=ell)
    if jacobi is not None:
        truncation = replace(truncation, jacobi=jacobi)

    tolerances = config.tolerances if relative is None else replace(config.tolerances, relative=relative)

    directory = config.output_dir
    environment = os.environ.get(OUTPUT_DIR_ENV)
    if output_dir is not None:
        directory = Path(output_dir)
    elif environment:
        directory = Path(environment)

    return validate(
        replace(
            config,
            truncation=truncation,
            tolerances=tolerances,
            seed=config.seed if seed is None else seed,
            output_dir=directory,
        )
    )
