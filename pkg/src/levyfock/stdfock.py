r"""
Truncated symmetric Fock space over ℓ₂ ⊗ L²(X, σ).

The single-particle space is truncated to ℓ₂ indices 0 … K−1 and the grid points of a
:class:`~levyfock.grid.SpaceGrid`; the flat single-particle index of (ℓ, i) is ℓ·M + i and
carries the weight σᵢ. Level m stores a symmetric tensor by its values at the sorted
multisets I = (i₁ ≤ ⋯ ≤ i_m) of flat indices. With c_a the multiplicity of a in I the
full-space scalar product is

$$
    \langle T, U \rangle = \sum_m m! \sum_{I} \frac{m!}{\prod_a c_a!}
                           \prod_{a \in I} w_a \, T_m[I] \, U_m[I],
$$

which is the unique convention with ⟨h^⊗m, g^⊗m⟩ = m!·⟨h, g⟩^m.
"""

import bisect
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

from levyfock.constants import CSV_PRECISION
from levyfock.enums import OperatorPart
from levyfock.exceptions import GridMismatchError, TruncationError
from levyfock.grid import FieldFunction, SpaceGrid
from levyfock.orthopoly import JacobiCoeffs, truncated_matrix

logger = logging.getLogger(__name__)

IndexArray = NDArray[np.intp]


@lru_cache(maxsize=64)
def _multiset_basis(dim: int, m: int) -> tuple[IndexArray, dict[tuple[int, ...], int]]:
    """Sorted multisets of size m over range(dim) as rows, with a row lookup."""
    multisets = list(itertools.combinations_with_replacement(range(dim), m))
    logger.debug("Level %d basis over %d single-particle indices: %d multisets", m, dim, len(multisets))
    rows = np.array(multisets, dtype=np.intp).reshape(len(multisets), m)
    return rows, {multiset: r for r, multiset in enumerate(multisets)}


@lru_cache(maxsize=64)
def _multinomials(dim: int, m: int) -> NDArray[np.float64]:
    """m!/∏c_a! for every basis multiset of level m."""
    rows, _ = _multiset_basis(dim, m)
    counts = [
        math.factorial(m) // math.prod(math.factorial(len(list(g))) for _, g in itertools.groupby(row))
        for row in rows.tolist()
    ]
    return np.array(counts, dtype=np.float64)


@lru_cache(maxsize=64)
def _removal_table(dim: int, m: int) -> tuple[IndexArray, IndexArray, NDArray[np.float64], IndexArray]:
    """
    For every level-m multiset I and distinct element a of I: the row of I, a, the
    multiplicity of a in I, and the level-(m−1) row of I − a.
    """
    rows, _ = _multiset_basis(dim, m)
    _, lower = _multiset_basis(dim, m - 1)
    target, element, multiplicity, source = [], [], [], []
    for r, row in enumerate(rows.tolist()):
        for a, group in itertools.groupby(row):
            position = row.index(a)
            target.append(r)
            element.append(a)
            multiplicity.append(len(list(group)))
            source.append(lower[tuple(row[:position] + row[position + 1 :])])
    return (
        np.array(target, dtype=np.intp),
        np.array(element, dtype=np.intp),
        np.array(multiplicity, dtype=np.float64),
        np.array(source, dtype=np.intp),
    )


@lru_cache(maxsize=64)
def _insertion_table(dim: int, m: int) -> IndexArray:
    """ins[r, b] is the level-(m+1) row of (multiset r of level m) + b."""
    rows, _ = _multiset_basis(dim, m)
    _, upper = _multiset_basis(dim, m + 1)
    table = np.empty((rows.shape[0], dim), dtype=np.intp)
    for r, row in enumerate(rows.tolist()):
        for b in range(dim):
            extended = list(row)
            bisect.insort(extended, b)
            table[r, b] = upper[tuple(extended)]
    return table


@dataclass(frozen=True, eq=False)
class FockLayout:
    """
    Truncation of the symmetric Fock space: K ℓ₂ indices, a grid, and levels 0 … n_max.

    Parameters
    ----------
    ell : int
        ℓ₂ truncation K.
    grid : SpaceGrid
        Grid of the L²(X, σ) factor.
    n_max : int
        Highest stored level.
    """

    ell: int
    grid: SpaceGrid
    n_max: int
    _weights_cache: dict[int, NDArray[np.float64]] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        if self.ell < 1:
            raise ValueError(f"ℓ₂ truncation must be positive, got {self.ell}")
        if self.n_max < 0:
            raise ValueError(f"n_max must be non-negative, got {self.n_max}")

    @property
    def dim(self) -> int:
        """Single-particle dimension K·M."""
        return self.ell * self.grid.size

    @property
    def weights(self) -> NDArray[np.float64]:
        """Single-particle weights: σᵢ at flat index ℓ·M + i."""
        return np.tile(self.grid.weights, self.ell)

    def basis(self, m: int) -> IndexArray:
        """Level-m multisets as an array of shape (count, m)."""
        return _multiset_basis(self.dim, m)[0]

    def level_size(self, m: int) -> int:
        return int(self.basis(m).shape[0])

    def level_weights(self, m: int) -> NDArray[np.float64]:
        """(m!/∏c_a!)·∏w_a for every level-m multiset."""
        if m not in self._weights_cache:
            rows = self.basis(m)
            self._weights_cache[m] = _multinomials(self.dim, m) * np.prod(self.weights[rows], axis=1)
        return self._weights_cache[m]

    def same_as(self, other: "FockLayout") -> bool:
        return self is other or (
            self.ell == other.ell and self.n_max == other.n_max and self.grid.same_as(other.grid)
        )


@dataclass(frozen=True, eq=False)
class FockVector:
    """An element of the truncated symmetric Fock space; missing levels are zero."""

    layout: FockLayout
    levels: tuple[NDArray[np.float64], ...] = ()

    def __post_init__(self) -> None:
        levels = [np.asarray(level, dtype=np.float64) for level in self.levels]
        for m in range(len(levels), self.layout.n_max + 1):
            levels.append(np.zeros(self.layout.level_size(m)))
        if len(levels) != self.layout.n_max + 1:
            raise TruncationError("level", len(levels) - 1)
        for m, level in enumerate(levels):
            if level.shape != (self.layout.level_size(m),):
                raise ValueError(f"Level {m} has shape {level.shape}")
        object.__setattr__(self, "levels", tuple(levels))

    @classmethod
    def zero(cls, layout: FockLayout) -> "FockVector":
        return cls(layout)

    @classmethod
    def vacuum(cls, layout: FockLayout) -> "FockVector":
        return cls(layout, (np.ones(1),))

    def top_level(self) -> int:
        """Highest level with a non-zero entry, −1 for the zero vector."""
        for m in range(self.layout.n_max, -1, -1):
            if np.any(self.levels[m] != 0.0):
                return m
        return -1

    def __add__(self, other: "FockVector") -> "FockVector":
        _check_same_layout(self, other)
        return FockVector(self.layout, tuple(u + v for u, v in zip(self.levels, other.levels, strict=True)))

    def __sub__(self, other: "FockVector") -> "FockVector":
        _check_same_layout(self, other)
        return FockVector(self.layout, tuple(u - v for u, v in zip(self.levels, other.levels, strict=True)))

    def scaled(self, factor: float) -> "FockVector":
        return FockVector(self.layout, tuple(factor * level for level in self.levels))


def _check_same_layout(u: FockVector, v: FockVector) -> None:
    if not u.layout.same_as(v.layout):
        raise GridMismatchError("Fock vectors have different layouts")


def _check_single_particle(layout: FockLayout, h: NDArray[np.float64]) -> NDArray[np.float64]:
    values = np.asarray(h, dtype=np.float64).reshape(-1)
    if values.size != layout.dim:
        raise GridMismatchError(f"Single-particle vector has {values.size} entries, expected {layout.dim}")
    return values


def single_particle(layout: FockLayout, xi: NDArray[np.float64], phi: FieldFunction) -> NDArray[np.float64]:
    """ξ ⊗ φ for ξ ∈ ℝᴷ and φ on the layout's grid."""
    if not phi.grid.same_as(layout.grid):
        raise GridMismatchError("Test function does not live on the layout's grid")
    coefficients = np.asarray(xi, dtype=np.float64).reshape(-1)
    if coefficients.size != layout.ell:
        raise GridMismatchError(f"ℓ₂ vector has {coefficients.size} entries, expected {layout.ell}")
    return np.kron(coefficients, phi.values)


def basis_vector(layout: FockLayout, n: int) -> NDArray[np.float64]:
    """eₙ ∈ ℝᴷ."""
    if not 0 <= n < layout.ell:
        raise TruncationError("ell", n)
    e = np.zeros(layout.ell)
    e[n] = 1.0
    return e


def single_particle_inner(layout: FockLayout, h: NDArray[np.float64], g: NDArray[np.float64]) -> float:
    return float(np.sum(h * g * layout.weights))


def tensor_power(layout: FockLayout, h: NDArray[np.float64], n: int) -> FockVector:
    """h^⊗n as a single-level vector."""
    if n > layout.n_max:
        raise TruncationError("level", n)
    values = _check_single_particle(layout, h)
    levels = [np.zeros(layout.level_size(m)) for m in range(layout.n_max + 1)]
    levels[n] = np.prod(values[layout.basis(n)], axis=1)
    return FockVector(layout, tuple(levels))


def fock_inner(u: FockVector, v: FockVector) -> float:
    _check_same_layout(u, v)
    layout = u.layout
    return math.fsum(
        math.factorial(m) * float(np.sum(layout.level_weights(m) * x * y))
        for m, (x, y) in enumerate(zip(u.levels, v.levels, strict=True))
    )


def fock_norm(v: FockVector) -> float:
    return math.sqrt(max(fock_inner(v, v), 0.0))


def a_plus(h: NDArray[np.float64], v: FockVector) -> FockVector:
    """
    Creation: vₘ ↦ h ⊗̂ vₘ at level m + 1.

    Raises
    ------
    TruncationError
        If v has a non-zero entry at level ``n_max``.
    """
    layout = v.layout
    values = _check_single_particle(layout, h)
    if np.any(v.levels[layout.n_max] != 0.0):
        raise TruncationError("level", layout.n_max + 1)
    levels = [np.zeros(layout.level_size(0))]
    for m in range(1, layout.n_max + 1):
        target, element, multiplicity, source = _removal_table(layout.dim, m)
        out = np.zeros(layout.level_size(m))
        np.add.at(out, target, multiplicity * values[element] * v.levels[m - 1][source])
        levels.append(out / m)
    return FockVector(layout, tuple(levels))


def a_minus(h: NDArray[np.float64], v: FockVector) -> FockVector:
    """Annihilation, the adjoint of :func:`a_plus`: (a⁻(h)T)ₘ[I] = (m+1)·Σ_b h_b w_b T_{m+1}[I + b]."""
    layout = v.layout
    values = _check_single_particle(layout, h) * layout.weights
    levels = []
    for m in range(layout.n_max):
        table = _insertion_table(layout.dim, m)
        levels.append((m + 1) * (v.levels[m + 1][table] @ values))
    levels.append(np.zeros(layout.level_size(layout.n_max)))
    return FockVector(layout, tuple(levels))


def d_gamma(operator: NDArray[np.float64], v: FockVector) -> FockVector:
    """
    Differential second quantization: the sum over tensor slots of ``operator`` acting on
    that slot. ``operator`` acts on single-particle value vectors, (Th)_a = Σ_b T_ab h_b.
    """
    layout = v.layout
    matrix = np.asarray(operator, dtype=np.float64)
    if matrix.shape != (layout.dim, layout.dim):
        raise GridMismatchError(f"Operator has shape {matrix.shape}, expected {(layout.dim,) * 2}")
    levels = [np.zeros(layout.level_size(0))]
    for m in range(1, layout.n_max + 1):
        target, element, multiplicity, source = _removal_table(layout.dim, m)
        table = _insertion_table(layout.dim, m - 1)[source]
        acc = np.zeros(target.size)
        for b in range(layout.dim):
            acc += matrix[element, b] * v.levels[m][table[:, b]]
        out = np.zeros(layout.level_size(m))
        np.add.at(out, target, multiplicity * acc)
        levels.append(out)
    return FockVector(layout, tuple(levels))


def _raises_top_index(coeffs: JacobiCoeffs, ell: int) -> bool:
    """Whether J⁺ maps e_{K−1} outside the truncated ℓ₂, i.e. b_K ≠ 0 or unknown."""
    if coeffs.terminated and ell >= coeffs.order:
        return False
    if ell <= len(coeffs.b):
        return coeffs.b[ell - 1] != 0.0
    return True


def _check_ell_overflow(v: FockVector, coeffs: JacobiCoeffs) -> None:
    layout = v.layout
    if not _raises_top_index(coeffs, layout.ell):
        return
    top = layout.ell - 1
    for m in range(1, layout.n_max + 1):
        populated = np.any(layout.basis(m) // layout.grid.size == top, axis=1)
        if np.any(v.levels[m][populated] != 0.0):
            raise TruncationError("ell", layout.ell)


def _lifted(part: NDArray[np.float64], phi: FieldFunction) -> NDArray[np.float64]:
    """The single-particle operator (ℓ₂ part) ⊗ M_φ."""
    return np.kron(part, np.diag(phi.values))


def _vacuum_direction(layout: FockLayout, phi: FieldFunction) -> NDArray[np.float64]:
    return single_particle(layout, basis_vector(layout, 0), phi)


def A_plus(phi: FieldFunction, v: FockVector, coeffs: JacobiCoeffs, *, strict: bool = True) -> FockVector:
    """
    A⁺(φ) = a⁺(e₀⊗φ) + dΓ(J⁺⊗M_φ).

    Raises
    ------
    TruncationError
        If ``strict`` and a populated top ℓ₂ index would be raised out of the truncation,
        or if v has a non-zero entry at level ``n_max``.
    """
    layout = v.layout
    if strict:
        _check_ell_overflow(v, coeffs)
    matrix = truncated_matrix(coeffs, layout.ell)
    return a_plus(_vacuum_direction(layout, phi), v) + d_gamma(_lifted(matrix.plus, phi), v)


def A_zero(phi: FieldFunction, v: FockVector, coeffs: JacobiCoeffs) -> FockVector:
    """A⁰(φ) = dΓ(J⁰⊗M_φ)."""
    matrix = truncated_matrix(coeffs, v.layout.ell)
    return d_gamma(_lifted(matrix.zero, phi), v)


def A_minus(phi: FieldFunction, v: FockVector, coeffs: JacobiCoeffs) -> FockVector:
    """A⁻(φ) = a⁻(e₀⊗φ) + dΓ(J⁻⊗M_φ)."""
    layout = v.layout
    matrix = truncated_matrix(coeffs, layout.ell)
    return a_minus(_vacuum_direction(layout, phi), v) + d_gamma(_lifted(matrix.minus, phi), v)


def A_component(
    part: OperatorPart, phi: FieldFunction, v: FockVector, coeffs: JacobiCoeffs, *, strict: bool = True
) -> FockVector:
    match part:
        case OperatorPart.CREATION:
            return A_plus(phi, v, coeffs, strict=strict)
        case OperatorPart.NEUTRAL:
            return A_zero(phi, v, coeffs)
        case OperatorPart.ANNIHILATION:
            return A_minus(phi, v, coeffs)


def A_apply(
    phi: FieldFunction,
    v: FockVector,
    coeffs: JacobiCoeffs,
    *,
    strict: bool = True,
    direct: bool = False,
) -> FockVector:
    """
    A(φ) = A⁺(φ) + A⁰(φ) + A⁻(φ).

    With ``direct`` the operator is assembled as a⁺(e₀⊗φ) + dΓ(J⊗M_φ) + a⁻(e₀⊗φ), using the
    full truncated Jacobi matrix in a single second quantization.
    """
    layout = v.layout
    if not direct:
        return A_plus(phi, v, coeffs, strict=strict) + A_zero(phi, v, coeffs) + A_minus(phi, v, coeffs)
    if strict:
        _check_ell_overflow(v, coeffs)
    e0_phi = _vacuum_direction(layout, phi)
    matrix = truncated_matrix(coeffs, layout.ell)
    return a_plus(e0_phi, v) + d_gamma(_lifted(matrix.full, phi), v) + a_minus(e0_phi, v)


def _symmetrized_product(layout: FockLayout, h: NDArray[np.float64], g: NDArray[np.float64], n: int) -> FockVector:
    """h ⊗̂ g^⊗n evaluated entrywise on the level-(n+1) multisets."""
    rows = layout.basis(n + 1)
    hv, gv = h[rows], g[rows]
    out = np.zeros(rows.shape[0])
    for j in range(n + 1):
        out += hv[:, j] * np.prod(np.delete(gv, j, axis=1), axis=1)
    levels = [np.zeros(layout.level_size(m)) for m in range(layout.n_max + 1)]
    levels[n + 1] = out / (n + 1)
    return FockVector(layout, tuple(levels))


def product_vector_components(
    phi: FieldFunction,
    xi: NDArray[np.float64],
    psi: FieldFunction,
    n: int,
    coeffs: JacobiCoeffs,
    layout: FockLayout,
) -> dict[OperatorPart, FockVector]:
    """
    The three field components on a product vector (ξ⊗ψ)^⊗n, evaluated by the explicit
    product-vector formulas:

    - A⁺(φ)(ξ⊗ψ)^⊗n = (e₀⊗φ) ⊗̂ (ξ⊗ψ)^⊗n + n·(J⁺ξ ⊗ φψ) ⊗̂ (ξ⊗ψ)^⊗(n−1)
    - A⁰(φ)(ξ⊗ψ)^⊗n = n·(J⁰ξ ⊗ φψ) ⊗̂ (ξ⊗ψ)^⊗(n−1)
    - A⁻(φ)(ξ⊗ψ)^⊗n = n·ξ₀⟨φ, ψ⟩·(ξ⊗ψ)^⊗(n−1) + n·(J⁻ξ ⊗ φψ) ⊗̂ (ξ⊗ψ)^⊗(n−1)

    Requires 1 ≤ n ≤ n_max − 1.
    """
    if not 1 <= n < layout.n_max:
        raise TruncationError("level", n + 1)
    matrix = truncated_matrix(coeffs, layout.ell)
    coefficients = np.asarray(xi, dtype=np.float64)
    product = single_particle(layout, coefficients, psi)
    phi_psi = FieldFunction(layout.grid, phi.values * psi.values)
    overlap = coefficients[0] * float(np.sum(phi.values * psi.values * layout.grid.weights))

    def slot(part: NDArray[np.float64]) -> FockVector:
        return _symmetrized_product(layout, single_particle(layout, part @ coefficients, phi_psi), product, n - 1).scaled(n)

    return {
        OperatorPart.CREATION: _symmetrized_product(layout, _vacuum_direction(layout, phi), product, n)
        + slot(matrix.plus),
        OperatorPart.NEUTRAL: slot(matrix.zero),
        OperatorPart.ANNIHILATION: tensor_power(layout, product, n - 1).scaled(n * overlap) + slot(matrix.minus),
    }


def random_fock_vector(
    layout: FockLayout,
    levels: list[int] | range,
    rng: np.random.Generator,
    *,
    ell_below: int | None = None,
) -> FockVector:
    """
    Standard normal entries on the given levels.

    With ``ell_below`` only multisets whose ℓ₂ indices are all below it are populated.
    """
    stored = [np.zeros(layout.level_size(m)) for m in range(layout.n_max + 1)]
    for m in levels:
        values = rng.standard_normal(layout.level_size(m))
        if ell_below is not None:
            values[np.any(layout.basis(m) // layout.grid.size >= ell_below, axis=1)] = 0.0
        stored[m] = values
    return FockVector(layout, tuple(stored))


def dumps(v: FockVector) -> str:
    """
    Structured-text dump: one ``level<TAB>multiset<TAB>value`` line per stored entry, the
    multiset written as ``ell.point`` pairs.
    """
    layout = v.layout
    points = layout.grid.size
    lines = [f"# standard n_max={layout.n_max} ell={layout.ell} points={points}"]
    for m, level in enumerate(v.levels):
        for row, value in zip(layout.basis(m).tolist(), level.tolist(), strict=True):
            label = ",".join(f"{a // points}.{a % points}" for a in row)
            lines.append(f"{m}\t{label}\t{value:.{CSV_PRECISION}g}")
    return "\n".join(lines) + "\n"
