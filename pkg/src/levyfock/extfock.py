r"""
Truncated extended Fock space of a Lévy process.

Level n of the space is the direct sum over compositions α = (α₁, α₂, …) with weight
1α₁ + 2α₂ + ⋯ = n of block-symmetric functions of |α| = α₁ + α₂ + ⋯ grid variables:
the first α₁ variables form block 1, the next α₂ form block 2, and so on, and a function
is symmetric within each block. A variable of block k stands for a point at which a
symmetric function of n variables is evaluated k times (the diagonal map D_α). The
scalar product on level n is

$$
    (f, g)_n = \sum_{\alpha} K_\alpha \sum_{x \in X^{|\alpha|}} f_\alpha(x) g_\alpha(x)
               \sigma_{x_1} \cdots \sigma_{x_{|\alpha|}},
$$

and level n enters the full space with weight n!.

Coordinates are dense numpy arrays of shape (M,)·|α| in the canonical block order.
"""

import itertools
import math
import string
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

from levyfock.constants import CSV_PRECISION
from levyfock.enums import OperatorPart
from levyfock.exceptions import GridMismatchError, TruncationError
from levyfock.grid import FieldFunction, SpaceGrid
from levyfock.orthopoly import JacobiCoeffs

Level = dict["Composition", NDArray[np.float64]]


@dataclass(frozen=True)
class Composition:
    """
    A finitely supported sequence α = (α₁, α₂, …) of non-negative integers.

    Trailing zeros are dropped on construction, so equal sequences compare and hash equal.

    Parameters
    ----------
    parts : tuple[int, ...]
        Entries α₁, α₂, …; ``parts[k - 1]`` counts the blocks of multiplicity k.
    """

    parts: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        parts = tuple(int(p) for p in self.parts)
        if any(p < 0 for p in parts):
            raise ValueError(f"Composition entries must be non-negative: {parts}")
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, *parts: int) -> "Composition":
        return cls(tuple(parts))

    @property
    def weight(self) -> int:
        """n(α) = Σ k·αₖ."""
        return sum(k * count for k, count in enumerate(self.parts, start=1))

    @property
    def size(self) -> int:
        """|α| = Σ αₖ, the number of variables."""
        return sum(self.parts)

    @property
    def length(self) -> int:
        """Largest k with αₖ > 0 (0 for the empty composition)."""
        return len(self.parts)

    def entry(self, k: int) -> int:
        """αₖ, counting from k = 1."""
        return self.parts[k - 1] if 1 <= k <= len(self.parts) else 0

    def shifted(self, k: int, delta: int) -> "Composition":
        """α ± 1ₖ."""
        parts = list(self.parts) + [0] * max(0, k - len(self.parts))
        parts[k - 1] += delta
        return Composition(tuple(parts))

    def block_end(self, k: int) -> int:
        """α₁ + ⋯ + αₖ: the number of variables in blocks 1 … k."""
        return sum(self.parts[:k])

    def blocks(self) -> Iterator[tuple[int, range]]:
        """Yield (k, axes of block k) for every non-empty block."""
        start = 0
        for k, count in enumerate(self.parts, start=1):
            if count:
                yield k, range(start, start + count)
            start += count

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class FieldPrefactors:
    """
    Multipliers on the coefficient families of the field operators.

    All factors are one for the genuine operators; other values exist only to build
    negative controls that must break the moment agreement.

    Parameters
    ----------
    neutral : float
        Factor on the neutral coefficient αₖaₖ₋₁.
    pair_annihilation : float
        Factor on the prefactor n of the contracting annihilation term.
    demotion : float
        Factor on the prefactor (n/k)·αₖ₋₁·b²ₖ₋₁ of the demoting annihilation term.
    diagonal_weight : float
        Factor on K_α for compositions with a block of multiplicity two or more.
    """

    neutral: float = 1.0
    pair_annihilation: float = 1.0
    demotion: float = 1.0
    diagonal_weight: float = 1.0


IDENTITY_PREFACTORS = FieldPrefactors()


@dataclass(frozen=True, eq=False)
class ExtVector:
    """
    Element of the extended Fock space truncated at level ``n_max``.

    ``levels[n]`` maps compositions of weight n to coordinate arrays; a missing
    composition means a zero coordinate. Level 0 holds the empty composition with a
    0-dimensional array.
    """

    grid: SpaceGrid
    n_max: int
    levels: tuple[Level, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.n_max < 0:
            raise ValueError(f"n_max must be non-negative, got {self.n_max}")
        levels = tuple(dict(level) for level in self.levels)
        levels = levels + tuple({} for _ in range(self.n_max + 1 - len(levels)))
        if len(levels) != self.n_max + 1:
            raise TruncationError("level", len(levels) - 1)
        for n, level in enumerate(levels):
            for alpha, data in level.items():
                if alpha.weight != n:
                    raise ValueError(f"Composition {alpha} stored at level {n}")
                if data.shape != (self.grid.size,) * alpha.size:
                    raise ValueError(f"Coordinate {alpha} has shape {data.shape}")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def zero(cls, grid: SpaceGrid, n_max: int) -> "ExtVector":
        return cls(grid, n_max)

    @classmethod
    def vacuum(cls, grid: SpaceGrid, n_max: int) -> "ExtVector":
        """Ω = (1, 0, 0, …)."""
        return cls(grid, n_max, ({Composition(): np.array(1.0)},))

    def coordinate(self, alpha: Composition) -> NDArray[np.float64]:
        """f_α, zero if not stored."""
        if alpha.weight > self.n_max:
            raise TruncationError("level", alpha.weight)
        stored = self.levels[alpha.weight].get(alpha)
        if stored is None:
            return np.zeros((self.grid.size,) * alpha.size)
        return stored

    def top_level(self) -> int:
        """Highest level with a non-zero coordinate, −1 for the zero vector."""
        for n in range(self.n_max, -1, -1):
            if any(np.any(data != 0.0) for data in self.levels[n].values()):
                return n
        return -1

    def __add__(self, other: "ExtVector") -> "ExtVector":
        return combine(self, other, 1.0)

    def __sub__(self, other: "ExtVector") -> "ExtVector":
        return combine(self, other, -1.0)

    def scaled(self, factor: float) -> "ExtVector":
        return ExtVector(
            self.grid,
            self.n_max,
            tuple({alpha: factor * data for alpha, data in level.items()} for level in self.levels),
        )


def _check_compatible(u: ExtVector, v: ExtVector) -> None:
    if not u.grid.same_as(v.grid):
        raise GridMismatchError("Extended Fock vectors live on different grids")
    if u.n_max != v.n_max:
        raise GridMismatchError(f"Truncations differ: {u.n_max} and {v.n_max}")


def combine(u: ExtVector, v: ExtVector, factor: float) -> ExtVector:
    """u + factor·v."""
    _check_compatible(u, v)
    levels: list[Level] = []
    for left, right in zip(u.levels, v.levels, strict=True):
        level = dict(left)
        for alpha, data in right.items():
            level[alpha] = level[alpha] + factor * data if alpha in level else factor * data
        levels.append(level)
    return ExtVector(u.grid, u.n_max, tuple(levels))


def _integer_partitions(n: int, smallest: int = 1) -> Iterator[tuple[int, ...]]:
    """Partitions of n into non-decreasing parts, each at least ``smallest``."""
    if n == 0:
        yield ()
        return
    for part in range(smallest, n + 1):
        if part == n:
            yield (n,)
        elif 2 * part <= n:
            for rest in _integer_partitions(n - part, part):
                yield (part, *rest)


@lru_cache(maxsize=64)
def enumerate_compositions(n: int) -> tuple[Composition, ...]:
    """
    All compositions of weight n, in descending lexicographic order of (α₁, α₂, …).

    There is one composition per integer partition of n: αₖ counts the parts equal to k.

    Examples
    --------
    >>> [str(alpha) for alpha in enumerate_compositions(3)]
    ['(3)', '(1,1)', '(0,0,1)']
    """
    if n < 0:
        raise ValueError(f"Weight must be non-negative, got {n}")
    compositions = []
    for partition in _integer_partitions(n):
        parts = [0] * (max(partition) if partition else 0)
        for part in partition:
            parts[part - 1] += 1
        compositions.append(Composition(tuple(parts)))
    return tuple(sorted(compositions, key=lambda alpha: alpha.parts, reverse=True))


def k_alpha(alpha: Composition, coeffs: JacobiCoeffs) -> float:
    r"""
    The weight K_α of a composition in the level scalar product.

    $$
        K_\alpha = \frac{n(\alpha)!}{\alpha_1!\,\alpha_2!\cdots}
                   \prod_{k \ge 2} \left(\frac{b_1 \cdots b_{k-1}}{k!}\right)^{2\alpha_k}
    $$

    Raises
    ------
    TruncationError
        If a required bᵢ lies beyond a recurrence that was cut short.

    Examples
    --------
    With b₁ = 1, K_{(0,1)} = 2!·(1/2!)² = 0.5 and K_{(1,1)} = 3!·(1/2)² = 1.5.
    """
    value = math.factorial(alpha.weight) / math.prod(math.factorial(p) for p in alpha.parts)
    b_product = 1.0
    for k in range(2, alpha.length + 1):
        b_product *= coeffs.b_at(k - 1)
        count = alpha.entry(k)
        if count:
            value *= (b_product / math.factorial(k)) ** (2 * count)
    return value


def d_alpha(f: NDArray[np.float64], alpha: Composition) -> NDArray[np.float64]:
    """
    Restrict a symmetric function of n variables to the diagonal pattern of α.

    The first α₁ variables are used once each, then each of the next α₂ variables
    twice, each of the next α₃ three times, and so on.
    """
    if f.ndim != alpha.weight:
        raise ValueError(f"Tensor of order {f.ndim} does not match weight {alpha.weight} of {alpha}")
    if alpha.size == 0:
        return np.array(f, dtype=np.float64)
    letters = string.ascii_letters[: alpha.size]
    source = []
    position = 0
    for k, axes in alpha.blocks():
        for _ in axes:
            source.append(letters[position] * k)
            position += 1
    return np.einsum("".join(source) + "->" + letters, f)


@lru_cache(maxsize=256)
def _block_permutations(alpha: Composition) -> tuple[tuple[int, ...], ...]:
    """Axis orders of every product of within-block permutations."""
    per_block = [list(itertools.permutations(axes)) for _, axes in alpha.blocks()]
    orders = []
    for choice in itertools.product(*per_block):
        order = list(range(alpha.size))
        for (_, axes), permuted in zip(alpha.blocks(), choice, strict=True):
            for position, axis in zip(axes, permuted, strict=True):
                order[position] = axis
        orders.append(tuple(order))
    return tuple(orders)


def s_alpha(t: NDArray[np.float64], alpha: Composition) -> NDArray[np.float64]:
    """
    Orthogonal projection onto block-symmetric tensors: the average over all
    products of within-block permutations of the axes.
    """
    if t.ndim != alpha.size:
        raise ValueError(f"Tensor of order {t.ndim} does not match size {alpha.size} of {alpha}")
    orders = _block_permutations(alpha)
    if len(orders) == 1:
        return np.array(t, dtype=np.float64)
    return sum((np.transpose(t, order) for order in orders), np.zeros_like(t)) / len(orders)


def _integrate(t: NDArray[np.float64], sigma: NDArray[np.float64]) -> float:
    """Σ over all index tuples of t weighted by σ^⊗ndim."""
    for _ in range(t.ndim):
        t = t @ sigma
    return float(t)


def _multiply_axis(
    t: NDArray[np.float64], values: NDArray[np.float64], axis: int
) -> NDArray[np.float64]:
    shape = [1] * t.ndim
    shape[axis] = values.size
    return t * values.reshape(shape)


def _gram_weight(alpha: Composition, coeffs: JacobiCoeffs, prefactors: FieldPrefactors) -> float:
    weight = k_alpha(alpha, coeffs)
    if alpha.length >= 2:
        weight *= prefactors.diagonal_weight
    return weight


def ext_inner_level(
    f: Level,
    g: Level,
    grid: SpaceGrid,
    coeffs: JacobiCoeffs,
    *,
    prefactors: FieldPrefactors = IDENTITY_PREFACTORS,
) -> float:
    """
    Scalar product of two level-n coordinate maps, Σ_α K_α ⟨f_α, g_α⟩_{σ^⊗|α|}.

    Raises
    ------
    ValueError
        If the maps hold compositions of different weights.
    """
    weights = {alpha.weight for alpha in itertools.chain(f, g)}
    if len(weights) > 1:
        raise ValueError(f"Level mismatch: compositions of weights {sorted(weights)}")
    total = 0.0
    for alpha in sorted(f.keys() & g.keys(), key=lambda a: a.parts, reverse=True):
        total += _gram_weight(alpha, coeffs, prefactors) * _integrate(f[alpha] * g[alpha], grid.weights)
    return total


def ext_inner_full(
    f: ExtVector,
    g: ExtVector,
    coeffs: JacobiCoeffs,
    *,
    prefactors: FieldPrefactors = IDENTITY_PREFACTORS,
) -> float:
    """Σₙ n!·(fₙ, gₙ)ₙ."""
    _check_compatible(f, g)
    return sum(
        math.factorial(n) * ext_inner_level(fn, gn, f.grid, coeffs, prefactors=prefactors)
        for n, (fn, gn) in enumerate(zip(f.levels, g.levels, strict=True))
    )


def ext_norm(
    v: ExtVector, coeffs: JacobiCoeffs, *, prefactors: FieldPrefactors = IDENTITY_PREFACTORS
) -> float:
    return math.sqrt(max(ext_inner_full(v, v, coeffs, prefactors=prefactors), 0.0))


def j0_apply(
    xi: FieldFunction,
    v: ExtVector,
    coeffs: JacobiCoeffs,
    *,
    prefactors: FieldPrefactors = IDENTITY_PREFACTORS,
) -> ExtVector:
    """
    Neutral part of the field: level preserving, diagonal in α.

    output_α = Σₖ αₖ·aₖ₋₁·S_α(ξ(last variable of block k)·v_α).
    """
    if not xi.grid.same_as(v.grid):
        raise GridMismatchError("Test function and vector live on different grids")
    levels: list[Level] = []
    for level in v.levels:
        out: Level = {}
        for alpha, data in level.items():
            acc = np.zeros_like(data)
            for k, axes in alpha.blocks():
                count = len(axes)
                weighted = _multiply_axis(data, xi.values, axes[-1])
                acc += count * coeffs.a_at(k - 1) * s_alpha(weighted, alpha)
            out[alpha] = prefactors.neutral * acc
        levels.append(out)
    return ExtVector(v.grid, v.n_max, tuple(levels))


def jminus_apply(
    xi: FieldFunction,
    v: ExtVector,
    coeffs: JacobiCoeffs,
    *,
    prefactors: FieldPrefactors = IDENTITY_PREFACTORS,
) -> ExtVector:
    """
    Annihilation part of the field: level n to level n − 1.

    For an output composition α of weight n − 1 the coordinate is

    - n·S_α(Σₓ ξ(x)σ(x)·v_{α+1₁}(x, ·)), contracting one block-1 variable, plus
    - Σ_{k≥2} (n/k)·αₖ₋₁·b²ₖ₋₁·S_α(ξ(y)·v_{α−1ₖ₋₁+1ₖ}), where y is the last block-(k−1)
      variable of α, which is the variable of multiplicity k in the input coordinate.

    Input coordinates beyond the stored ones read as zero.
    """
    if not xi.grid.same_as(v.grid):
        raise GridMismatchError("Test function and vector live on different grids")
    size = v.grid.size
    contraction = xi.values * v.grid.weights
    levels: list[Level] = [{} for _ in range(v.n_max + 1)]

    for n in range(1, v.n_max + 1):
        source = v.levels[n]
        if not source:
            continue
        for alpha in enumerate_compositions(n - 1):
            acc = np.zeros((size,) * alpha.size)

            paired = alpha.shifted(1, 1)
            if paired in source:
                contracted = np.tensordot(contraction, source[paired], axes=([0], [0]))
                acc += prefactors.pair_annihilation * n * s_alpha(contracted, alpha)

            for k in range(2, alpha.length + 2):
                lower = alpha.entry(k - 1)
                if lower == 0:
                    continue
                promoted = alpha.shifted(k - 1, -1).shifted(k, 1)
                if promoted not in source:
                    continue
                coefficient = (n / k) * lower * coeffs.b_at(k - 1) ** 2
                weighted = _multiply_axis(source[promoted], xi.values, alpha.block_end(k - 1) - 1)
                acc += prefactors.demotion * coefficient * s_alpha(weighted, alpha)

            levels[n - 1][alpha] = acc
    return ExtVector(v.grid, v.n_max, tuple(levels))


def jplus_apply(phi: FieldFunction, v: ExtVector) -> ExtVector:
    """
    Creation part of the field on arbitrary coordinate families: level n to n + 1.

    This is the adjoint of :func:`jminus_apply` for the full scalar product. For an
    output composition β of weight n + 1,

    (J⁺v)_β = 1/(n+1)·Σₖ k·βₖ·S_β(φ(y)·v_{β−1ₖ+1ₖ₋₁}),

    where y is the first block-k variable of β; for k = 1 it is a new variable and the
    input coordinate is v_{β−1₁}. On vectors of the form (D_α f)_α it reproduces
    φ ⊗̂ f, see :func:`jplus_apply_monomial`.

    Raises
    ------
    TruncationError
        If v has a non-zero coordinate at level ``n_max``.
    """
    if not phi.grid.same_as(v.grid):
        raise GridMismatchError("Test function and vector live on different grids")
    size = v.grid.size
    levels: list[Level] = [{} for _ in range(v.n_max + 1)]

    for n in range(v.n_max + 1):
        source = v.levels[n]
        if not source:
            continue
        if n == v.n_max:
            if any(np.any(data != 0.0) for data in source.values()):
                raise TruncationError("level", n + 1)
            continue
        for beta in enumerate_compositions(n + 1):
            acc = np.zeros((size,) * beta.size)

            if beta.entry(1):
                reduced = beta.shifted(1, -1)
                if reduced in source:
                    created = np.multiply.outer(phi.values, source[reduced])
                    acc += beta.entry(1) * s_alpha(created, beta)

            for k in range(2, beta.length + 1):
                count = beta.entry(k)
                if count == 0:
                    continue
                demoted = beta.shifted(k, -1).shifted(k - 1, 1)
                if demoted not in source:
                    continue
                weighted = _multiply_axis(source[demoted], phi.values, beta.block_end(k - 1))
                acc += k * count * s_alpha(weighted, beta)

            levels[n + 1][beta] = acc / (n + 1)
    return ExtVector(v.grid, v.n_max, tuple(levels))


def symmetric_product(phi: FieldFunction, f: NDArray[np.float64]) -> NDArray[np.float64]:
    """φ ⊗̂ f for a symmetric tensor f: the symmetrization of φ ⊗ f."""
    product = np.multiply.outer(phi.values, f)
    order = f.ndim + 1
    return sum((np.moveaxis(product, 0, j) for j in range(order)), np.zeros_like(product)) / order


def ext_coordinates(f: NDArray[np.float64]) -> Level:
    """The coordinate map f ↦ (D_α f)_α of a symmetric tensor of order n."""
    return {alpha: d_alpha(f, alpha) for alpha in enumerate_compositions(f.ndim)}


def ext_from_symmetric(f: NDArray[np.float64], grid: SpaceGrid, n_max: int) -> ExtVector:
    """Embed a symmetric tensor as a single-level extended Fock vector."""
    if f.ndim > n_max:
        raise TruncationError("level", f.ndim)
    levels: list[Level] = [{} for _ in range(n_max + 1)]
    levels[f.ndim] = ext_coordinates(f)
    return ExtVector(grid, n_max, tuple(levels))


def jplus_apply_monomial(phi: FieldFunction, f: NDArray[np.float64]) -> Level:
    """Coordinates of φ ⊗̂ f at level n + 1 for a genuine symmetric tensor f of order n."""
    return ext_coordinates(symmetric_product(phi, f))


def jfield_apply(
    phi: FieldFunction,
    v: ExtVector,
    coeffs: JacobiCoeffs,
    *,
    prefactors: FieldPrefactors = IDENTITY_PREFACTORS,
) -> ExtVector:
    """J(φ) = J⁺(φ) + J⁰(φ) + J⁻(φ)."""
    return (
        jplus_apply(phi, v)
        + j0_apply(phi, v, coeffs, prefactors=prefactors)
        + jminus_apply(phi, v, coeffs, prefactors=prefactors)
    )


def j_component_apply(
    part: OperatorPart,
    phi: FieldFunction,
    v: ExtVector,
    coeffs: JacobiCoeffs,
    *,
    prefactors: FieldPrefactors = IDENTITY_PREFACTORS,
) -> ExtVector:
    """Apply one of J⁺(φ), J⁰(φ), J⁻(φ)."""
    match part:
        case OperatorPart.CREATION:
            return jplus_apply(phi, v)
        case OperatorPart.NEUTRAL:
            return j0_apply(phi, v, coeffs, prefactors=prefactors)
        case OperatorPart.ANNIHILATION:
            return jminus_apply(phi, v, coeffs, prefactors=prefactors)


def random_ext_vector(
    grid: SpaceGrid, n_max: int, levels: Iterable[int], rng: np.random.Generator
) -> ExtVector:
    """Block-symmetric standard normal coordinates on the given levels."""
    stored: list[Level] = [{} for _ in range(n_max + 1)]
    for n in levels:
        for alpha in enumerate_compositions(n):
            raw = np.asarray(rng.standard_normal((grid.size,) * alpha.size), dtype=np.float64)
            stored[n][alpha] = s_alpha(raw, alpha)
    return ExtVector(grid, n_max, tuple(stored))


def dumps(v: ExtVector) -> str:
    """
    Structured-text dump: one ``level<TAB>composition<TAB>index<TAB>value`` line per entry,
    compositions in enumeration order and indices in lexicographic order.
    """
    lines = [f"# extended n_max={v.n_max} points={v.grid.size}"]
    for n, level in enumerate(v.levels):
        for alpha in enumerate_compositions(n):
            if alpha not in level:
                continue
            data = level[alpha]
            for index in itertools.product(range(v.grid.size), repeat=alpha.size):
                value = float(data[index])
                label = ",".join(str(i) for i in index)
                lines.append(f"{n}\t{alpha}\t{label}\t{value:.{CSV_PRECISION}g}")
    return "\n".join(lines) + "\n"
