"""Enumerations for measure presets, grids and operator parts."""

from enum import StrEnum


class MeasurePreset(StrEnum):
    """
    Named Lévy measures that can be requested from an experiment config.
    """

    TWO_POINT_SYMMETRIC = "two_point_symmetric"
    """Jump measure with equal mass at ±h."""

    THREE_POINT_ASYMMETRIC = "three_point_asymmetric"
    """Jump measure with three atoms and non-zero odd moments."""

    GAMMA = "gamma"
    """Gamma process, jump measure λ²s·exp(−λs)ds discretized by quadrature."""

    POISSON = "poisson"
    """Compensated Poisson process with a single jump size."""

    PASCAL = "pascal"
    """Pascal (negative binomial) process with jumps on the positive integers."""

    @property
    def meixner(self) -> bool:
        """
        Whether the Lévy measure belongs to the Meixner class.

        For these processes the Wick powers of ⟨ω, 1⟩ span the chaos of every order, so the
        composition-weight identity holds at all orders, not only up to order three.
        """
        return self in {MeasurePreset.GAMMA, MeasurePreset.POISSON, MeasurePreset.PASCAL}


class MeasureKind(StrEnum):
    """Which measure an explicit atom list describes."""

    NU = "nu"
    """The Lévy measure itself."""

    NU_TILDE = "nu_tilde"
    """The jump measure s²ν(ds)."""


class DiscretizationRule(StrEnum):
    """Reference quadrature used to turn a continuous jump measure into atoms."""

    GAUSS_LAGUERRE = "gauss_laguerre"
    """Generalized Gauss-Laguerre rule with exponent one."""

    GAUSS_LEGENDRE = "gauss_legendre"
    """Gauss-Legendre rule on [0, cutoff] with the density as weight."""


class GridPreset(StrEnum):
    """Named space grids."""

    SINGLE_POINT = "single_point"
    UNIFORM = "uniform"


class FunctionPreset(StrEnum):
    """Named test functions."""

    CONSTANT = "constant"
    RANDOM = "random"


class Representation(StrEnum):
    """
    Fock representation in which the Jacobi field is realized.
    """

    EXTENDED = "ext"
    """Extended (interacting) Fock space indexed by compositions."""

    STANDARD = "std"
    """Symmetric Fock space over ℓ₂ ⊗ L²(X, σ)."""


class OperatorPart(StrEnum):
    """Creation, neutral and annihilation parts of a field operator."""

    CREATION = "+"
    NEUTRAL = "0"
    ANNIHILATION = "-"


class CoefficientFamily(StrEnum):
    """Coefficient families that can be perturbed in negative controls."""

    DIAGONAL = "a"
    OFF_DIAGONAL = "b"


class NegativeControl(StrEnum):
    """Single-family perturbations that must break the moment agreement."""

    DIAGONAL = "diagonal_coefficients"
    """All aₙ."""

    OFF_DIAGONAL = "off_diagonal_coefficients"
    """All bₙ."""

    COMPOSITION_WEIGHT = "composition_weight"
    """K_α for compositions with a block of multiplicity two or more."""

    NEUTRAL = "neutral_prefactor"
    """The neutral coefficient αₖaₖ₋₁."""

    PAIR_ANNIHILATION = "pair_annihilation_prefactor"
    """The prefactor n of the contracting annihilation term."""

    DEMOTION = "demotion_prefactor"
    """The prefactor (n/k)·αₖ₋₁·b²ₖ₋₁ of the demoting annihilation term."""
