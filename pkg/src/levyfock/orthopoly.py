r"""
Orthonormal polynomials of the jump measure and their Jacobi matrix.

The recurrence convention is

$$
    s\,p_n(s) = b_{n+1} p_{n+1}(s) + a_n p_n(s) + b_n p_{n-1}(s), \qquad p_{-1} := 0,
$$

so that bₙ couples the basis vectors eₙ₋₁ and eₙ of ℓ₂. Gauss quadrature nodes and
weights are obtained from the eigen-decomposition of the truncated matrix; this is the
finite form of the transform from ℓ₂ to L²(ℝ, ν̃) that sends e₀ to the constant 1 and the
Jacobi matrix to multiplication by s.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import LinAlgError, eigh_tridiagonal

from levyfock.constants import CLUSTER_TOLERANCE, POSITIVITY_TOLERANCE
from levyfock.enums import CoefficientFamily
from levyfock.exceptions import MeasureError, QuadratureError, SupportExhaustedError, TruncationError
from levyfock.measure import LevyModel, moment

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class JacobiCoeffs:
    """
    Recurrence coefficients a₀ … a_{N−1} and b₁ … b_{N−1}.

    Parameters
    ----------
    a : tuple[float, ...]
        Diagonal coefficients, ``a[n]`` is aₙ.
    b : tuple[float, ...]
        Off-diagonal coefficients, ``b[n - 1]`` is bₙ.
    terminated : bool, default=False
        True when the support of ν̃ is exhausted, i.e. b_N = 0 and every coefficient past
        the stored ones vanishes.
    requested : int | None, default=None
        Order asked of the Stieltjes procedure, if it differs from N.
    """

    a: tuple[float, ...]
    b: tuple[float, ...]
    terminated: bool = False
    requested: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.a:
            raise ValueError("At least one recurrence level is required")
        if len(self.b) != len(self.a) - 1:
            raise ValueError(f"Expected {len(self.a) - 1} off-diagonal coefficients, got {len(self.b)}")

    @property
    def order(self) -> int:
        """Number N of stored levels."""
        return len(self.a)

    def a_at(self, n: int) -> float:
        """
        Return aₙ, or 0 past a terminated recurrence.

        Raises
        ------
        TruncationError
            If n lies past a recurrence that was cut short by the requested order.
        """
        if n < 0:
            raise ValueError(f"Negative recurrence index {n}")
        if n < len(self.a):
            return self.a[n]
        if self.terminated:
            return 0.0
        raise TruncationError("a", n)

    def b_at(self, n: int) -> float:
        """
        Return bₙ (with b₀ := 0), or 0 past a terminated recurrence.

        Raises
        ------
        TruncationError
            If n lies past a recurrence that was cut short by the requested order.
        """
        if n < 0:
            raise ValueError(f"Negative recurrence index {n}")
        if n == 0:
            return 0.0
        if n <= len(self.b):
            return self.b[n - 1]
        if self.terminated:
            return 0.0
        raise TruncationError("b", n)

    def perturbed(self, family: CoefficientFamily, relative: float) -> "JacobiCoeffs":
        """Copy with every coefficient of one family multiplied by 1 + relative."""
        factor = 1.0 + relative
        if family is CoefficientFamily.DIAGONAL:
            return replace(self, a=tuple(x * factor for x in self.a))
        return replace(self, b=tuple(x * factor for x in self.b))


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """
    Truncated Jacobi matrix and its creation, neutral and annihilation parts.

    ``plus`` is strictly lower triangular (J⁺eₙ = bₙ₊₁eₙ₊₁), ``zero`` is diagonal and
    ``minus`` strictly upper triangular (J⁻eₙ = bₙeₙ₋₁), with full = plus + zero + minus.
    """

    full: NDArray[np.float64]
    plus: NDArray[np.float64]
    zero: NDArray[np.float64]
    minus: NDArray[np.float64]

    @property
    def size(self) -> int:
        return int(self.full.shape[0])


@dataclass(frozen=True, eq=False)
class GaussQuadrature:
    """
    Gauss nodes and weights of a truncated Jacobi matrix, with its eigenvectors.

    Nodes are in ascending order; ``vectors[:, i]`` is the orthonormal eigenvector of
    node i with a non-negative first component.
    """

    nodes: NDArray[np.float64]
    weights: NDArray[np.float64]
    vectors: NDArray[np.float64]

    def pairs(self) -> list[tuple[float, float]]:
        """The (sᵢ, wᵢ) pairs."""
        return [(float(s), float(w)) for s, w in zip(self.nodes, self.weights, strict=True)]

    def moment(self, k: int) -> float:
        """Σᵢ wᵢ sᵢᵏ."""
        return math.fsum((self.weights * self.nodes**k).tolist())


def stieltjes(model: LevyModel, order: int) -> JacobiCoeffs:
    """
    Compute recurrence coefficients of ν̃ by the discretized Stieltjes procedure.

    The orthonormal polynomials are carried as vectors of values at the atoms and
    orthogonalized level by level, which avoids the ill-conditioned moment matrices.

    Parameters
    ----------
    model : LevyModel
        Normalized jump measure.
    order : int
        Requested number N of levels.

    Returns
    -------
    JacobiCoeffs
        Coefficients with a₀ = m̃₁ and b₁² = m̃₂ − m̃₁². When ν̃ has P < N atoms only P
        levels exist; the result is flagged ``terminated`` and a warning is logged.

    Raises
    ------
    SupportExhaustedError
        If some bₙ² falls below tolerance before the support is exhausted.
    """
    if order < 1:
        raise ValueError(f"Jacobi order must be positive, got {order}")
    if not model.is_normalized:
        raise MeasureError("Stieltjes needs a probability-normalized jump measure")

    s = np.asarray(model.jumps, dtype=np.float64)
    w = np.asarray(model.weights, dtype=np.float64)
    support = model.support_size
    floor = POSITIVITY_TOLERANCE * moment(model, 2)

    a: list[float] = []
    b: list[float] = []
    q_prev = np.zeros_like(s)
    q = np.ones_like(s)
    b_n = 0.0

    for n in range(order):
        a.append(math.fsum((w * s * q * q).tolist()))
        if n == order - 1 or n + 1 >= support:
            break
        r = (s - a[n]) * q - b_n * q_prev
        b_sq = math.fsum((w * r * r).tolist())
        if b_sq <= floor:
            raise SupportExhaustedError(n + 1, b_sq)
        b_n = math.sqrt(b_sq)
        b.append(b_n)
        q_prev, q = q, r / b_n

    terminated = len(a) >= support
    if len(a) < order:
        logger.warning(
            "Support of the jump measure has %d atoms: Jacobi matrix terminates at order %d "
            "(requested %d)",
            support,
            len(a),
            order,
        )
    return JacobiCoeffs(a=tuple(a), b=tuple(b), terminated=terminated, requested=order)


def truncated_matrix(coeffs: JacobiCoeffs, size: int | None = None) -> TridiagonalOperator:
    """
    Assemble the symmetric tridiagonal Jacobi matrix of the given size.

    Parameters
    ----------
    coeffs : JacobiCoeffs
        Recurrence coefficients.
    size : int | None, default=None
        Matrix size; defaults to the number of stored levels. Larger sizes are padded
        with zeros past a terminated recurrence.

    Returns
    -------
    TridiagonalOperator
        The matrix and its split into J⁺, J⁰ and J⁻.
    """
    n = coeffs.order if size is None else size
    if n < 1:
        raise ValueError(f"Matrix size must be positive, got {n}")
    diagonal = np.array([coeffs.a_at(i) for i in range(n)], dtype=np.float64)
    off = np.array([coeffs.b_at(i) for i in range(1, n)], dtype=np.float64)

    plus = np.diag(off, -1)
    zero = np.diag(diagonal)
    minus = np.diag(off, 1)
    return TridiagonalOperator(full=plus + zero + minus, plus=plus, zero=zero, minus=minus)


def golub_welsch(coeffs: JacobiCoeffs) -> GaussQuadrature:
    """
    Gauss quadrature from the eigen-decomposition of the truncated Jacobi matrix.

    Nodes are the eigenvalues; weights are the squared first components of the
    normalized eigenvectors, so they are positive and sum to m̃₀ = 1.

    Raises
    ------
    QuadratureError
        If the tridiagonal eigen-solver fails.
    """
    a = np.asarray(coeffs.a, dtype=np.float64)
    b = np.asarray(coeffs.b, dtype=np.float64)

    if a.size == 1:
        nodes = a.copy()
        vectors = np.ones((1, 1))
    else:
        try:
            nodes, vectors = eigh_tridiagonal(a, b)
        except LinAlgError as e:
            raise QuadratureError(f"Eigen-decomposition of the order-{a.size} Jacobi matrix failed") from e

    # deterministic eigenvector signs
    vectors = vectors * np.where(vectors[0, :] < 0.0, -1.0, 1.0)
    weights = vectors[0, :] ** 2

    gaps = np.diff(nodes)
    scale = np.maximum(1.0, np.abs(nodes[1:]))
    if np.any(gaps <= CLUSTER_TOLERANCE * scale):
        logger.warning("Clustered Gauss nodes detected (minimum gap %.3e)", float(gaps.min()))

    return GaussQuadrature(nodes=nodes, weights=weights, vectors=vectors)


def single_particle_intertwining_residual(model: LevyModel, coeffs: JacobiCoeffs) -> float:
    """
    Witness that the eigenbasis transform turns J into multiplication by s.

    Returns the largest relative moment deviation max_{k ≤ 2N−1} |Σ wᵢsᵢᵏ − m̃ₖ| / max(1, |m̃ₖ|)
    plus the spectral-norm residual ‖VᵀJV − diag(sᵢ)‖.
    """
    quadrature = golub_welsch(coeffs)
    exactness = max(
        abs(quadrature.moment(k) - moment(model, k)) / max(1.0, abs(moment(model, k)))
        for k in range(2 * coeffs.order)
    )
    matrix = truncated_matrix(coeffs).full
    v = quadrature.vectors
    diagonalization = float(np.linalg.norm(v.T @ matrix @ v - np.diag(quadrature.nodes), ord=2))
    return exactness + diagonalization


def orthonormal_polynomials(coeffs: JacobiCoeffs, s: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Evaluate p₀ … p_{N−1} at the points s by the three-term recurrence.

    Returns
    -------
    NDArray[np.float64]
        Array of shape (N, len(s)) with row n holding pₙ(s).
    """
    points = np.atleast_1d(np.asarray(s, dtype=np.float64))
    values = np.zeros((coeffs.order, points.size))
    values[0] = 1.0
    for n in range(coeffs.order - 1):
        previous = values[n - 1] if n > 0 else 0.0
        values[n + 1] = ((points - coeffs.a[n]) * values[n] - coeffs.b_at(n) * previous) / coeffs.b[n]
    return values


def spectral_transform(coeffs: JacobiCoeffs) -> tuple[GaussQuadrature, NDArray[np.float64]]:
    """
    The finite spectral transform from ℓ₂ to L²(ℝ, ν̃) at the Gauss nodes.

    Column i of the returned matrix is (pₙ(sᵢ)·√wᵢ)ₙ. It is orthogonal, its first row is
    (√wᵢ)ᵢ, the image of e₀ being the constant function 1, and it conjugates the truncated
    Jacobi matrix to diag(sᵢ).
    """
    quadrature = golub_welsch(coeffs)
    values = orthonormal_polynomials(coeffs, quadrature.nodes)
    return quadrature, values * np.sqrt(quadrature.weights)[np.newaxis, :]


def divide_by_nodes(values: NDArray[np.float64], nodes: NDArray[np.float64]) -> NDArray[np.float64]:
    """f(s) ↦ f(s)/s at the node set, the passage from L²(ν̃) to L²(ν)."""
    if np.any(nodes == 0.0):
        raise MeasureError("Node at s = 0: division by the jump size is undefined")
    return np.asarray(values, dtype=np.float64) / nodes


def multiply_by_nodes(values: NDArray[np.float64], nodes: NDArray[np.float64]) -> NDArray[np.float64]:
    """Inverse of :func:`divide_by_nodes`."""
    return np.asarray(values, dtype=np.float64) * nodes
