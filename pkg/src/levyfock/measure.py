"""Lévy measures as weighted atoms: the jump measure ν̃(ds) = s²ν(ds) and its moments."""

import logging
import math
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import roots_genlaguerre, roots_legendre

from levyfock.constants import (
    DEFAULT_GAMMA_CUTOFF,
    DEFAULT_GAMMA_NODES,
    DEFAULT_PASCAL_TERMS,
    WEIGHT_SUM_TOLERANCE,
)
from levyfock.enums import DiscretizationRule
from levyfock.exceptions import MeasureError

logger = logging.getLogger(__name__)

Atom = tuple[float, float]


@dataclass(frozen=True)
class LevyModel:
    """
    A jump measure ν̃ given by finitely many atoms.

    Atoms are stored sorted by jump size with duplicates merged, so every quantity
    derived from a model is independent of the order in which atoms were supplied.

    Parameters
    ----------
    jumps : tuple[float, ...]
        Strictly increasing, non-zero jump sizes sⱼ.
    weights : tuple[float, ...]
        Positive weights wⱼ of ν̃ at each jump size.
    scale : float, default=1.0
        Total mass c of ν̃ before normalization. Grid weights are multiplied by it.

    Raises
    ------
    MeasureError
        If the atoms are empty, contain a zero jump, or a non-positive weight.
    """

    jumps: tuple[float, ...]
    weights: tuple[float, ...]
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.jumps:
            raise MeasureError("A Lévy measure needs at least one atom")
        if len(self.jumps) != len(self.weights):
            raise MeasureError("Jump sizes and weights have different lengths")
        for s, w in zip(self.jumps, self.weights, strict=True):
            if not (math.isfinite(s) and math.isfinite(w)):
                raise MeasureError(f"Non-finite atom ({s}, {w})")
            if s == 0.0:
                raise MeasureError("ν({0}) must vanish: atom at jump size 0")
            if w <= 0.0:
                raise MeasureError(f"Non-positive weight {w} at jump size {s}")
        if any(a >= b for a, b in zip(self.jumps, self.jumps[1:], strict=False)):
            raise MeasureError("Jump sizes must be strictly increasing; use LevyModel.from_atoms")
        if self.scale <= 0.0:
            raise MeasureError(f"Scale must be positive, got {self.scale}")

    @classmethod
    def from_atoms(cls, atoms: Iterable[Atom], *, scale: float = 1.0) -> "LevyModel":
        """
        Build a model from raw (s, w) pairs without normalizing.

        Parameters
        ----------
        atoms : Iterable[tuple[float, float]]
            Jump sizes and weights of ν̃, in any order. Repeated jump sizes are merged.
        scale : float, default=1.0
            Recorded normalization scale.

        Returns
        -------
        LevyModel
            The canonicalized model.
        """
        merged: dict[float, list[float]] = defaultdict(list)
        for s, w in atoms:
            merged[float(s)].append(float(w))
        jumps = tuple(sorted(merged))
        weights = tuple(math.fsum(merged[s]) for s in jumps)
        model = cls(jumps=jumps, weights=weights, scale=scale)
        if len(jumps) == 1:
            logger.warning("Single-atom jump measure: the Jacobi matrix terminates at size 1")
        return model

    @property
    def atoms(self) -> list[Atom]:
        """The (s, w) pairs in ascending jump order."""
        return list(zip(self.jumps, self.weights, strict=True))

    @property
    def total_mass(self) -> float:
        """ν̃(ℝ) as stored."""
        return math.fsum(self.weights)

    @property
    def support_size(self) -> int:
        """Number of distinct atoms."""
        return len(self.jumps)

    @property
    def is_normalized(self) -> bool:
        """Whether the weights sum to one within tolerance."""
        return abs(self.total_mass - 1.0) <= WEIGHT_SUM_TOLERANCE

    def moment(self, k: int) -> float:
        """The k-th moment; see :func:`moment`."""
        return moment(self, k)


def nu_tilde_from_nu(nu_atoms: Iterable[Atom]) -> LevyModel:
    """
    Derive the normalized jump measure ν̃(ds) = s²ν(ds)/c from atoms of ν.

    Parameters
    ----------
    nu_atoms : Iterable[tuple[float, float]]
        Atoms (s, w) of the Lévy measure ν.

    Returns
    -------
    LevyModel
        Probability-normalized ν̃ with ``scale`` set to c = Σ s²w.

    Raises
    ------
    MeasureError
        If the list is empty, has an atom at zero, or a non-positive weight.

    Examples
    --------
    >>> model = nu_tilde_from_nu([(2.0, 1.0)])
    >>> model.atoms, model.scale
    ([(2.0, 1.0)], 4.0)
    """
    nu = list(nu_atoms)
    if not nu:
        raise MeasureError("The Lévy measure has no atoms")
    for s, w in nu:
        if s == 0.0:
            raise MeasureError("ν({0}) must vanish: atom at jump size 0")
        if w <= 0.0:
            raise MeasureError(f"Non-positive weight {w} at jump size {s}")
    tilde = LevyModel.from_atoms((s, s * s * w) for s, w in nu)
    normalized, _ = normalize(tilde)
    return normalized


def normalize(model: LevyModel) -> tuple[LevyModel, float]:
    """
    Rescale ν̃ to a probability measure.

    The Lévy measure is divided by c = ν̃(ℝ) and the intensity σ is multiplied by c,
    which leaves the process unchanged.

    Parameters
    ----------
    model : LevyModel
        Model with positive total mass.

    Returns
    -------
    tuple[LevyModel, float]
        The normalized model (its ``scale`` accumulates c) and the factor c by which
        grid weights must be multiplied.

    Raises
    ------
    MeasureError
        If the total mass is not positive.
    """
    mass = model.total_mass
    if not mass > 0.0:
        raise MeasureError("Cannot normalize a measure of zero mass")
    if model.is_normalized:
        return model, 1.0
    weights = tuple(w / mass for w in model.weights)
    return LevyModel(jumps=model.jumps, weights=weights, scale=model.scale * mass), mass


def moment(model: LevyModel, k: int) -> float:
    """
    Exact weighted power sum m̃ₖ = Σⱼ wⱼ sⱼᵏ, accumulated with compensated summation.

    Parameters
    ----------
    model : LevyModel
        The jump measure.
    k : int
        Non-negative order.

    Returns
    -------
    float
        The k-th moment. For k = 0 on a normalized model this is exactly 1.
    """
    if k < 0:
        raise ValueError(f"Moment order must be non-negative, got {k}")
    if k == 0 and model.is_normalized:
        return 1.0
    return math.fsum(w * s**k for s, w in zip(model.jumps, model.weights, strict=True))


def moments(model: LevyModel, upto: int) -> NDArray[np.float64]:
    """Vector of moments m̃₀ … m̃_upto."""
    return np.array([moment(model, k) for k in range(upto + 1)], dtype=np.float64)


def exp_moment_report(model: LevyModel, eps: float) -> float:
    """
    Evaluate Σⱼ wⱼ exp(ε|sⱼ|), the exponential moment of ν̃.

    Always finite for atomic models; reported alongside results so that the
    exponential integrability of the jump measure is documented.
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    return math.fsum(w * math.exp(eps * abs(s)) for s, w in model.atoms)


def two_point_symmetric(jump: float = 1.0) -> LevyModel:
    """ν̃ with mass ½ at ±jump."""
    return LevyModel.from_atoms([(-abs(jump), 0.5), (abs(jump), 0.5)])


def three_point_asymmetric(
    jumps: tuple[float, float, float] = (-1.0, 1.0, 2.0),
    weights: tuple[float, float, float] = (0.2, 0.5, 0.3),
) -> LevyModel:
    """Three-atom ν̃ with non-vanishing odd moments, normalized."""
    model, _ = normalize(LevyModel.from_atoms(zip(jumps, weights, strict=True)))
    return model


def gamma(
    nodes: int = DEFAULT_GAMMA_NODES,
    *,
    rate: float = 1.0,
    rule: DiscretizationRule = DiscretizationRule.GAUSS_LAGUERRE,
    cutoff: float = DEFAULT_GAMMA_CUTOFF,
) -> LevyModel:
    """
    Discretize the Gamma jump measure ν̃(ds) = λ²s·exp(−λs)ds on (0, ∞).

    Parameters
    ----------
    nodes : int, default=64
        Number of reference quadrature nodes.
    rate : float, default=1.0
        Rate λ of the exponential tilt; the Lévy measure is s⁻¹exp(−λs)ds.
    rule : DiscretizationRule, default=GAUSS_LAGUERRE
        Reference quadrature. Gauss-Laguerre with exponent one integrates the density
        exactly against polynomials of degree below 2·nodes.
    cutoff : float, default=80.0
        Upper limit (in units of 1/λ) for the Gauss-Legendre rule.

    Returns
    -------
    LevyModel
        Normalized atomic approximation with moments m̃ₖ ≈ (k+1)!/λᵏ.
    """
    if nodes < 1:
        raise MeasureError(f"Gamma discretization needs at least one node, got {nodes}")
    if rate <= 0.0:
        raise MeasureError(f"Gamma rate must be positive, got {rate}")

    if rule is DiscretizationRule.GAUSS_LAGUERRE:
        x, w = roots_genlaguerre(nodes, 1.0)
    else:
        x, w = roots_legendre(nodes)
        x = 0.5 * cutoff * (x + 1.0)
        w = 0.5 * cutoff * w * x * np.exp(-x)

    keep = w > 0.0
    x, w = x[keep], w[keep]
    w = w / math.fsum(w.tolist())
    return LevyModel.from_atoms(zip((x / rate).tolist(), w.tolist(), strict=True))


def poisson(jump: float = 1.0, intensity: float = 1.0) -> LevyModel:
    """Compensated Poisson process: ν = intensity·δ_jump."""
    return nu_tilde_from_nu([(jump, intensity)])


def pascal(q: float = 0.5, terms: int = DEFAULT_PASCAL_TERMS) -> LevyModel:
    """
    Pascal process: ν = Σₖ qᵏ/k · δₖ, kept to the first ``terms`` atoms.

    The jump measure is ν̃ = Σₖ k·qᵏ δₖ, normalized.
    """
    if not 0.0 < q < 1.0:
        raise MeasureError(f"Pascal parameter q must lie in (0, 1), got {q}")
    return nu_tilde_from_nu((float(k), q**k / k) for k in range(1, terms + 1))
