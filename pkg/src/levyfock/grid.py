"""Finite weighted discretization of the space (X, σ) and real test functions on it."""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from levyfock.exceptions import GridMismatchError


@dataclass(frozen=True, eq=False)
class SpaceGrid:
    """
    M points with positive weights σ₁ … σ_M.

    The weights already carry the normalization scale c of the jump measure, so that
    the grid realizes the rescaled intensity cσ.

    Parameters
    ----------
    weights : NDArray[np.float64]
        Positive weights, one per point.

    Raises
    ------
    ValueError
        If there are no points or a weight is not positive.
    """

    weights: NDArray[np.float64]

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if weights.size < 1:
            raise ValueError("A grid needs at least one point")
        if not np.all(weights > 0.0) or not np.all(np.isfinite(weights)):
            raise ValueError("Grid weights must be positive and finite")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def single_point(cls, weight: float = 1.0, *, sigma_scale: float = 1.0) -> "SpaceGrid":
        """One point of weight ``weight``·``sigma_scale``."""
        return cls(np.array([weight * sigma_scale]))

    @classmethod
    def uniform(cls, points: int, mass: float = 1.0, *, sigma_scale: float = 1.0) -> "SpaceGrid":
        """``points`` points sharing total mass ``mass``·``sigma_scale`` equally."""
        if points < 1:
            raise ValueError(f"A uniform grid needs at least one point, got {points}")
        return cls(np.full(points, mass * sigma_scale / points))

    @classmethod
    def from_weights(cls, weights: list[float], *, sigma_scale: float = 1.0) -> "SpaceGrid":
        """Explicit weights, multiplied by ``sigma_scale``."""
        return cls(np.asarray(weights, dtype=np.float64) * sigma_scale)

    @property
    def size(self) -> int:
        """Number of points M."""
        return int(self.weights.size)

    def same_as(self, other: "SpaceGrid") -> bool:
        """Whether two grids carry identical weights."""
        return self is other or (
            self.size == other.size and bool(np.array_equal(self.weights, other.weights))
        )


@dataclass(frozen=True, eq=False)
class FieldFunction:
    """
    A real function φ on a grid.

    Parameters
    ----------
    grid : SpaceGrid
        The grid it lives on.
    values : NDArray[np.float64]
        Values φ₁ … φ_M.
    """

    grid: SpaceGrid
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if values.size != self.grid.size:
            raise GridMismatchError(
                f"Function has {values.size} values but the grid has {self.grid.size} points"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, grid: SpaceGrid, value: float = 1.0) -> "FieldFunction":
        return cls(grid, np.full(grid.size, value))

    @classmethod
    def random(cls, grid: SpaceGrid, rng: np.random.Generator) -> "FieldFunction":
        """Standard normal values drawn from ``rng``."""
        return cls(grid, rng.standard_normal(grid.size))


def _check_same_grid(phi: FieldFunction, psi: FieldFunction) -> None:
    if not phi.grid.same_as(psi.grid):
        raise GridMismatchError("Test functions live on different grids")


def inner(phi: FieldFunction, psi: FieldFunction) -> float:
    """
    The L²(X, σ) scalar product Σᵢ φᵢψᵢσᵢ.

    Raises
    ------
    GridMismatchError
        If the functions live on different grids.
    """
    _check_same_grid(phi, psi)
    return float(np.sum(phi.values * psi.values * phi.grid.weights))


def norm(phi: FieldFunction) -> float:
    """‖φ‖ in L²(X, σ)."""
    return float(np.sqrt(inner(phi, phi)))


def pointwise_product(phi: FieldFunction, psi: FieldFunction) -> FieldFunction:
    """
    The coordinatewise product φψ.

    Raises
    ------
    GridMismatchError
        If the functions live on different grids.
    """
    _check_same_grid(phi, psi)
    return FieldFunction(phi.grid, phi.values * psi.values)
