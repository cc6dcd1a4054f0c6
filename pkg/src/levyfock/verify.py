"""
Independent oracles and the equivalence harness.

The extended and the standard representation of the Jacobi field are unitarily equivalent,
and the vacuum is cyclic, so at finite truncation the equivalence is witnessed by equal
vacuum moments. Both are compared with the moments obtained from the cumulants of the
Lévy white noise, κₘ = m̃ₘ₋₂·Σᵢ φᵢᵐσᵢ.
"""

import hashlib
import itertools
import json
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
import sympy
from numpy.typing import NDArray

from levyfock.constants import (
    DEFAULT_ABSOLUTE_TOLERANCE,
    DEFAULT_RELATIVE_TOLERANCE,
    DEFAULT_TRIALS,
    GENERAL_HANKEL_ORDER,
    HANKEL_MAX_ORDER,
    HANKEL_PARAMETERS,
    OPERATOR_TOLERANCE,
    PATH_TOLERANCE,
)
from levyfock.enums import CoefficientFamily, NegativeControl, OperatorPart, Representation
from levyfock.exceptions import OracleError, TruncationError
from levyfock.extfock import (
    IDENTITY_PREFACTORS,
    Composition,
    ExtVector,
    FieldPrefactors,
    enumerate_compositions,
    ext_from_symmetric,
    ext_inner_full,
    ext_norm,
    j_component_apply,
    jfield_apply,
    jminus_apply,
    jplus_apply,
    jplus_apply_monomial,
    k_alpha,
    random_ext_vector,
    s_alpha,
)
from levyfock.grid import FieldFunction
from levyfock.measure import LevyModel, moment
from levyfock.orthopoly import JacobiCoeffs, single_particle_intertwining_residual
from levyfock.stdfock import (
    A_apply,
    A_component,
    FockLayout,
    FockVector,
    a_minus,
    a_plus,
    fock_inner,
    fock_norm,
    product_vector_components,
    random_fock_vector,
    single_particle_inner,
    tensor_power,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    """
    Acceptance thresholds.

    Parameters
    ----------
    relative : float
        Relative tolerance of moment agreement and of the Hankel identity.
    absolute : float
        Absolute tolerance where the oracle value is zero.
    trials : int
        Random trials per property check.
    """

    relative: float = DEFAULT_RELATIVE_TOLERANCE
    absolute: float = DEFAULT_ABSOLUTE_TOLERANCE
    trials: int = DEFAULT_TRIALS


def cumulants(phi: FieldFunction, model: LevyModel, order: int) -> list[float]:
    """
    κ₁ … κ_order of ⟨ω, φ⟩ under the centered Lévy white noise.

    κ₁ = 0 and κₘ = m̃ₘ₋₂·Σᵢ φᵢᵐσᵢ, with ν̃ normalized and σ carrying its scale.
    """
    if order < 1:
        raise ValueError(f"Cumulant order must be positive, got {order}")
    weights = phi.grid.weights
    kappa = [0.0]
    for m in range(2, order + 1):
        kappa.append(moment(model, m - 2) * math.fsum((phi.values**m * weights).tolist()))
    return kappa


def moments_from_cumulants(kappa: Sequence[float]) -> list[float]:
    """
    Moments m₀ … mₙ from cumulants κ₁ … κₙ by mₙ = Σⱼ C(n−1, j−1)·κⱼ·mₙ₋ⱼ, m₀ = 1.

    Examples
    --------
    >>> moments_from_cumulants([0.0, 1.0, 0.0, 1.0])
    [1.0, 0.0, 1.0, 0.0, 4.0]
    """
    m = [1.0]
    for n in range(1, len(kappa) + 1):
        m.append(math.fsum(math.comb(n - 1, j - 1) * kappa[j - 1] * m[n - j] for j in range(1, n + 1)))
    return m


def _exact_moments_from_cumulants(kappa: Sequence[Fraction]) -> list[Fraction]:
    m = [Fraction(1)]
    for n in range(1, len(kappa) + 1):
        m.append(sum((math.comb(n - 1, j - 1) * kappa[j - 1] * m[n - j] for j in range(1, n + 1)), Fraction(0)))
    return m


def scalar_law_moments(model: LevyModel, t: float, upto: int) -> list[Fraction]:
    """
    Exact moments of Y = ⟨ω, 1⟩ on a one-point grid of weight t.

    The atoms of ν̃ are converted to rationals without rounding, so the Hankel determinants
    built from these moments carry no rounding error.
    """
    jumps = [Fraction(s) for s in model.jumps]
    weights = [Fraction(w) for w in model.weights]
    mass = sum(weights, Fraction(0))
    weight = Fraction(t)
    kappa = [Fraction(0)]
    for m in range(2, upto + 1):
        tilde = sum((w * s ** (m - 2) for s, w in zip(jumps, weights, strict=True)), Fraction(0)) / mass
        kappa.append(weight * tilde)
    return _exact_moments_from_cumulants(kappa[:upto])


def _rational(x: float | Fraction) -> sympy.Rational:
    value = Fraction(x)
    return sympy.Rational(value.numerator, value.denominator)


def hankel_determinant(moments: Sequence[float | Fraction], k: int) -> sympy.Rational:
    """
    Determinant of the (k+1)×(k+1) Hankel matrix (m_{i+j}), evaluated exactly.

    Float moments are converted to rationals exactly, so the result is the determinant of
    the matrix as given, free of cancellation.
    """
    if len(moments) < 2 * k + 1:
        raise ValueError(f"Order-{k} Hankel determinant needs {2 * k + 1} moments, got {len(moments)}")
    matrix = sympy.Matrix(k + 1, k + 1, lambda i, j: _rational(moments[i + j]))
    return matrix.det(method="bareiss")


def wick_norm_oracle(moments: Sequence[float | Fraction], n: int) -> float:
    """
    ‖:Yⁿ:‖² = Dₙ/Dₙ₋₁, the squared norm of the monic orthogonal polynomial of degree n.

    Raises
    ------
    OracleError
        If a Hankel matrix of order ≤ n is not positive definite.

    Examples
    --------
    >>> wick_norm_oracle([1, 0, 1, 0, 4], 2)
    3.0
    """
    previous = sympy.Integer(1)
    current = previous
    for k in range(n + 1):
        previous, current = current, hankel_determinant(moments, k)
        if current <= 0:
            raise OracleError(k)
    return float(current / previous)


def composition_polynomial(
    n: int, coeffs: JacobiCoeffs, t: float, *, prefactors: FieldPrefactors = IDENTITY_PREFACTORS
) -> float:
    """Σ over compositions of weight n of K_α·t^|α|."""
    total = []
    for alpha in enumerate_compositions(n):
        weight = k_alpha(alpha, coeffs)
        if alpha.length >= 2:
            weight *= prefactors.diagonal_weight
        total.append(weight * t**alpha.size)
    return math.fsum(total)


def hankel_identity_gap(
    model: LevyModel,
    coeffs: JacobiCoeffs,
    n: int,
    t: float,
    *,
    prefactors: FieldPrefactors = IDENTITY_PREFACTORS,
) -> float:
    """Relative gap between (1/n!)·‖:Yⁿ:‖² and Σ K_α t^|α| on a one-point grid of weight t."""
    oracle = wick_norm_oracle(scalar_law_moments(model, t, 2 * n), n) / math.factorial(n)
    value = composition_polynomial(n, coeffs, t, prefactors=prefactors)
    return abs(value - oracle) / max(abs(oracle), 1.0)


def _ext_powers(
    phi: FieldFunction, coeffs: JacobiCoeffs, count: int, n_max: int, prefactors: FieldPrefactors
) -> list[ExtVector]:
    powers = [ExtVector.vacuum(phi.grid, n_max)]
    for _ in range(count):
        powers.append(jfield_apply(phi, powers[-1], coeffs, prefactors=prefactors))
    return powers


def vacuum_moments_ext(
    phi: FieldFunction,
    coeffs: JacobiCoeffs,
    order: int,
    *,
    split: bool = True,
    prefactors: FieldPrefactors = IDENTITY_PREFACTORS,
) -> list[float]:
    """
    ⟨Ω, J(φ)ᵏΩ⟩ in the extended Fock space for k = 0 … order.

    With ``split`` the moment is paired as ⟨J^⌊k/2⌋Ω, J^⌈k/2⌉Ω⟩, which needs only levels
    up to ⌈order/2⌉. Otherwise it is the level-0 coordinate of J(φ)ᵏΩ, which runs every
    annihilation branch.
    """
    if split:
        half = (order + 1) // 2
        powers = _ext_powers(phi, coeffs, half, max(half, 1), prefactors)
        return [
            ext_inner_full(powers[k // 2], powers[k - k // 2], coeffs, prefactors=prefactors)
            for k in range(order + 1)
        ]
    powers = _ext_powers(phi, coeffs, order, max(order, 1), prefactors)
    vacuum = ExtVector.vacuum(phi.grid, powers[0].n_max)
    return [ext_inner_full(vacuum, v, coeffs, prefactors=prefactors) for v in powers]


def vacuum_moments_std(
    phi: FieldFunction,
    coeffs: JacobiCoeffs,
    order: int,
    *,
    ell: int | None = None,
    split: bool = True,
) -> list[float]:
    """⟨Ω, A(φ)ᵏΩ⟩ in the symmetric Fock space for k = 0 … order; see :func:`vacuum_moments_ext`."""
    ell = order + 1 if ell is None else ell
    count = (order + 1) // 2 if split else order
    layout = FockLayout(ell, phi.grid, max(count, 1))
    powers = [FockVector.vacuum(layout)]
    for _ in range(count):
        powers.append(A_apply(phi, powers[-1], coeffs))
    if split:
        return [fock_inner(powers[k // 2], powers[k - k // 2]) for k in range(order + 1)]
    vacuum = FockVector.vacuum(layout)
    return [fock_inner(vacuum, v) for v in powers]


def word_moment(
    word: Sequence[OperatorPart],
    functions: Sequence[FieldFunction],
    representation: Representation,
    coeffs: JacobiCoeffs,
    *,
    ell: int | None = None,
) -> float:
    """
    ⟨Ω, X^{p₁}(φ₁)⋯X^{pₖ}(φₖ)Ω⟩ for a word p₁ … pₖ in the creation, neutral and annihilation
    parts; the rightmost operator acts first.
    """
    if len(word) != len(functions):
        raise ValueError(f"Word of length {len(word)} needs as many functions, got {len(functions)}")
    if not word:
        return 1.0
    grid = functions[0].grid
    n_max = len(word)
    if representation is Representation.EXTENDED:
        v = ExtVector.vacuum(grid, n_max)
        for part, phi in zip(reversed(word), reversed(functions), strict=True):
            v = j_component_apply(part, phi, v, coeffs)
        return ext_inner_full(ExtVector.vacuum(grid, n_max), v, coeffs)
    layout = FockLayout(n_max + 1 if ell is None else ell, grid, n_max)
    u = FockVector.vacuum(layout)
    for part, phi in zip(reversed(word), reversed(functions), strict=True):
        u = A_component(part, phi, u, coeffs)
    return fock_inner(FockVector.vacuum(layout), u)


def mixed_moments(
    functions: Sequence[FieldFunction],
    representation: Representation,
    coeffs: JacobiCoeffs,
    *,
    ell: int | None = None,
) -> float:
    """⟨Ω, X(φ₁)⋯X(φₖ)Ω⟩, the rightmost operator acting first."""
    if not functions:
        return 1.0
    grid = functions[0].grid
    n_max = len(functions)
    if representation is Representation.EXTENDED:
        v = ExtVector.vacuum(grid, n_max)
        for phi in reversed(functions):
            v = jfield_apply(phi, v, coeffs)
        return ext_inner_full(ExtVector.vacuum(grid, n_max), v, coeffs)
    layout = FockLayout(n_max + 1 if ell is None else ell, grid, n_max)
    u = FockVector.vacuum(layout)
    for phi in reversed(functions):
        u = A_apply(phi, u, coeffs)
    return fock_inner(FockVector.vacuum(layout), u)


@dataclass(frozen=True)
class MomentReport:
    """The k-th vacuum moment in both representations and from the cumulant oracle."""

    order: int
    extended: float
    standard: float
    oracle: float

    @property
    def max_abs_deviation(self) -> float:
        values = (self.extended, self.standard, self.oracle)
        return max(abs(x - y) for x, y in itertools.combinations(values, 2))

    @property
    def max_rel_deviation(self) -> float:
        """Largest pairwise gap relative to the oracle value (absolute where it is zero)."""
        scale = abs(self.oracle)
        return self.max_abs_deviation / scale if scale > 0.0 else self.max_abs_deviation

    def agrees(self, tolerances: Tolerances) -> bool:
        return self.max_abs_deviation <= max(tolerances.relative * abs(self.oracle), tolerances.absolute)


def moment_reports(
    phi: FieldFunction,
    model: LevyModel,
    coeffs: JacobiCoeffs,
    order: int,
    *,
    ell: int | None = None,
) -> list[MomentReport]:
    """Triple comparison of the vacuum moments of orders 0 … order."""
    extended = vacuum_moments_ext(phi, coeffs, order)
    standard = vacuum_moments_std(phi, coeffs, order, ell=ell)
    oracle = moments_from_cumulants(cumulants(phi, model, order))
    return [
        MomentReport(order=k, extended=extended[k], standard=standard[k], oracle=oracle[k])
        for k in range(order + 1)
    ]


def control_gap(
    control: NegativeControl,
    phi: FieldFunction,
    model: LevyModel,
    coeffs: JacobiCoeffs,
    *,
    order: int = 4,
    relative: float = 0.01,
) -> float:
    """
    Largest relative deviation from the oracle of the extended vacuum moments up to
    ``order`` after perturbing one coefficient family by ``relative``.
    """
    oracle = moments_from_cumulants(cumulants(phi, model, order))
    factor = 1.0 + relative
    perturbed = coeffs
    prefactors = IDENTITY_PREFACTORS
    split = False
    match control:
        case NegativeControl.DIAGONAL:
            perturbed = coeffs.perturbed(CoefficientFamily.DIAGONAL, relative)
        case NegativeControl.OFF_DIAGONAL:
            perturbed = coeffs.perturbed(CoefficientFamily.OFF_DIAGONAL, relative)
        case NegativeControl.COMPOSITION_WEIGHT:
            prefactors = FieldPrefactors(diagonal_weight=factor)
            split = True
        case NegativeControl.NEUTRAL:
            prefactors = FieldPrefactors(neutral=factor)
        case NegativeControl.PAIR_ANNIHILATION:
            prefactors = FieldPrefactors(pair_annihilation=factor)
        case NegativeControl.DEMOTION:
            prefactors = FieldPrefactors(demotion=factor)
    values = vacuum_moments_ext(phi, perturbed, order, split=split, prefactors=prefactors)
    return max(abs(v - o) / max(1.0, abs(o)) for v, o in zip(values, oracle, strict=True))


@dataclass(frozen=True)
class CheckResult:
    name: str
    inputs_digest: str
    deviation: float
    threshold: float
    passed: bool


@dataclass
class VerificationReport:
    """Outcome of :func:`property_suite`: every check and the moment table."""

    seed: int
    inputs_digest: str
    checks: list[CheckResult] = field(default_factory=list)
    moments: dict[str, list[MomentReport]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "inputs_digest": self.inputs_digest,
            "passed": self.passed,
            "checks": [asdict(check) for check in self.checks],
            "moments": [
                {
                    "function": name,
                    "k": report.order,
                    "extended_fock": report.extended,
                    "standard_fock": report.standard,
                    "cumulant_oracle": report.oracle,
                    "max_rel_deviation": report.max_rel_deviation,
                }
                for name, reports in self.moments.items()
                for report in reports
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def inputs_digest(payload: Mapping[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of the experiment inputs."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _gap(x: float, y: float, scale: float) -> float:
    difference = abs(x - y)
    return difference / scale if scale > 0.0 else difference


def _random_symmetric(grid_size: int, n: int, rng: np.random.Generator) -> NDArray[np.float64]:
    return s_alpha(np.asarray(rng.standard_normal((grid_size,) * n), dtype=np.float64), Composition.of(n))


class _Suite:
    """Accumulates check results; a failing check never stops the run."""

    def __init__(self, digest: str) -> None:
        self.digest = digest
        self.checks: list[CheckResult] = []

    def record(self, name: str, deviation: float, threshold: float, passed: bool | None = None) -> None:
        if passed is None:
            passed = bool(np.isfinite(deviation)) and deviation <= threshold
        self.checks.append(CheckResult(name, self.digest, float(deviation), threshold, passed))
        if passed:
            logger.debug("%s passed (deviation %.3e, threshold %.1e)", name, deviation, threshold)
        else:
            logger.warning("%s FAILED (deviation %.3e, threshold %.1e)", name, deviation, threshold)


def property_suite(
    model: LevyModel,
    coeffs: JacobiCoeffs,
    functions: Mapping[str, FieldFunction],
    *,
    n_max: int,
    ell: int,
    tolerances: Tolerances | None = None,
    seed: int = 0,
    digest: str = "",
    meixner: bool = False,
) -> VerificationReport:
    """
    Run every invariant of the two representations and the moment triple agreement.

    Parameters
    ----------
    model : LevyModel
        Normalized jump measure the coefficients were computed from.
    coeffs : JacobiCoeffs
        Recurrence coefficients with at least ``ell`` levels, or terminated.
    functions : Mapping[str, FieldFunction]
        Named test functions on a common grid.
    n_max : int
        Level truncation.
    ell : int
        ℓ₂ truncation K.
    tolerances : Tolerances
        Acceptance thresholds and number of random trials.
    seed : int
        Seed of the random inputs.
    digest : str
        Digest of the experiment inputs recorded with every check.
    meixner : bool
        Whether the measure is of Meixner class. Otherwise the composition-weight identity is
        only checked up to order three, beyond which it does not hold in general.

    Returns
    -------
    VerificationReport
        All checks, passed or failed, and the moment table per function.
    """
    if not functions:
        raise ValueError("At least one test function is required")
    if n_max < 1:
        raise TruncationError("level", n_max)
    tolerances = Tolerances() if tolerances is None else tolerances
    grid = next(iter(functions.values())).grid
    rng = np.random.default_rng(seed)
    suite = _Suite(digest)
    report = VerificationReport(seed=seed, inputs_digest=digest)

    suite.record(
        "quadrature_exactness", single_particle_intertwining_residual(model, coeffs), tolerances.relative
    )

    # extended representation
    top = n_max - 1
    worst = {"ext_adjointness": 0.0, "ext_symmetry": 0.0, "ext_commutator": 0.0, "monomial_creation": 0.0}
    for _ in range(tolerances.trials):
        phi, psi = FieldFunction.random(grid, rng), FieldFunction.random(grid, rng)
        f = random_ext_vector(grid, n_max, range(top + 1), rng)
        g = random_ext_vector(grid, n_max, range(n_max + 1), rng)
        created, annihilated = jplus_apply(phi, f), jminus_apply(phi, g, coeffs)
        scale = ext_norm(created, coeffs) * ext_norm(g, coeffs) + ext_norm(f, coeffs) * ext_norm(annihilated, coeffs)
        worst["ext_adjointness"] = max(
            worst["ext_adjointness"],
            _gap(ext_inner_full(created, g, coeffs), ext_inner_full(f, annihilated, coeffs), scale),
        )

        h = random_ext_vector(grid, n_max, range(top + 1), rng)
        jf, jh = jfield_apply(phi, f, coeffs), jfield_apply(phi, h, coeffs)
        scale = ext_norm(jf, coeffs) * ext_norm(h, coeffs) + ext_norm(f, coeffs) * ext_norm(jh, coeffs)
        worst["ext_symmetry"] = max(
            worst["ext_symmetry"], _gap(ext_inner_full(jf, h, coeffs), ext_inner_full(f, jh, coeffs), scale)
        )

        if n_max >= 2:
            v = random_ext_vector(grid, n_max, range(n_max - 1), rng)
            forward = jfield_apply(phi, jfield_apply(psi, v, coeffs), coeffs)
            backward = jfield_apply(psi, jfield_apply(phi, v, coeffs), coeffs)
            scale = ext_norm(forward, coeffs) + ext_norm(backward, coeffs)
            difference = ext_norm(forward - backward, coeffs)
            worst["ext_commutator"] = max(worst["ext_commutator"], difference / scale if scale > 0 else difference)

        n = int(rng.integers(0, n_max))
        tensor = _random_symmetric(grid.size, n, rng)
        coordinates = jplus_apply(phi, ext_from_symmetric(tensor, grid, n_max)).levels[n + 1]
        for alpha, expected in jplus_apply_monomial(phi, tensor).items():
            scale = float(np.max(np.abs(expected)))
            error = float(np.max(np.abs(coordinates[alpha] - expected)))
            worst["monomial_creation"] = max(worst["monomial_creation"], error / scale if scale > 0 else error)
    for name, deviation in worst.items():
        suite.record(name, deviation, OPERATOR_TOLERANCE)

    # K_α of weight n needs b₁ … bₙ₋₁
    limit = HANKEL_MAX_ORDER if meixner else GENERAL_HANKEL_ORDER
    if not coeffs.terminated:
        limit = min(limit, coeffs.order)
    hankel = 0.0
    for t in HANKEL_PARAMETERS:
        for n in range(1, limit + 1):
            hankel = max(hankel, hankel_identity_gap(model, coeffs, n, t))
    suite.record("hankel_identity", hankel, tolerances.relative)

    # standard representation
    layout = FockLayout(ell, grid, n_max)
    worst = {
        "std_adjointness": 0.0,
        "std_symmetry": 0.0,
        "std_commutator": 0.0,
        "normative_identity": 0.0,
        "product_formulas": 0.0,
        "field_paths": 0.0,
    }
    for _ in range(tolerances.trials):
        phi, psi = FieldFunction.random(grid, rng), FieldFunction.random(grid, rng)
        h = rng.standard_normal(layout.dim)
        f = random_fock_vector(layout, range(top + 1), rng)
        g = random_fock_vector(layout, range(n_max + 1), rng)
        created, annihilated = a_plus(h, f), a_minus(h, g)
        scale = fock_norm(created) * fock_norm(g) + fock_norm(f) * fock_norm(annihilated)
        worst["std_adjointness"] = max(
            worst["std_adjointness"], _gap(fock_inner(created, g), fock_inner(f, annihilated), scale)
        )

        u = random_fock_vector(layout, range(top + 1), rng, ell_below=ell - 1)
        w = random_fock_vector(layout, range(top + 1), rng, ell_below=ell - 1)
        au, aw = A_apply(phi, u, coeffs, strict=False), A_apply(phi, w, coeffs, strict=False)
        scale = fock_norm(au) * fock_norm(w) + fock_norm(u) * fock_norm(aw)
        worst["std_symmetry"] = max(worst["std_symmetry"], _gap(fock_inner(au, w), fock_inner(u, aw), scale))

        full = A_apply(phi, u, coeffs, strict=False, direct=True)
        scale = fock_norm(au)
        difference = fock_norm(au - full)
        worst["field_paths"] = max(worst["field_paths"], difference / scale if scale > 0 else difference)

        if n_max >= 2:
            v = random_fock_vector(layout, range(n_max - 1), rng, ell_below=ell - 1)
            forward = A_apply(phi, A_apply(psi, v, coeffs, strict=False), coeffs, strict=False)
            backward = A_apply(psi, A_apply(phi, v, coeffs, strict=False), coeffs, strict=False)
            scale = fock_norm(forward) + fock_norm(backward)
            difference = fock_norm(forward - backward)
            worst["std_commutator"] = max(worst["std_commutator"], difference / scale if scale > 0 else difference)

        g1 = rng.standard_normal(layout.dim)
        for n in range(n_max + 1):
            expected = math.factorial(n) * single_particle_inner(layout, h, g1) ** n
            scale = math.factorial(n) * (
                math.sqrt(single_particle_inner(layout, h, h) * single_particle_inner(layout, g1, g1))
            ) ** n
            value = fock_inner(tensor_power(layout, h, n), tensor_power(layout, g1, n))
            worst["normative_identity"] = max(worst["normative_identity"], _gap(value, expected, scale))

        xi = rng.standard_normal(ell)
        for n in range(1, min(4, n_max - 1) + 1):
            product = tensor_power(layout, np.kron(xi, psi.values), n)
            formulas = product_vector_components(phi, xi, psi, n, coeffs, layout)
            for part, expected_vector in formulas.items():
                assembled = A_component(part, phi, product, coeffs, strict=False)
                scale = fock_norm(expected_vector)
                difference = fock_norm(assembled - expected_vector)
                worst["product_formulas"] = max(
                    worst["product_formulas"], difference / scale if scale > 0 else difference
                )
    for name, deviation in worst.items():
        threshold = PATH_TOLERANCE if name in {"product_formulas", "field_paths"} else OPERATOR_TOLERANCE
        suite.record(name, deviation, threshold)

    # cross-representation
    for name, phi in functions.items():
        reports = moment_reports(phi, model, coeffs, n_max, ell=ell)
        report.moments[name] = reports
        # agreement is relative, or absolute at oracle zeros
        suite.record(
            f"moments[{name}]",
            max(r.max_rel_deviation for r in reports),
            tolerances.relative,
            passed=all(r.agrees(tolerances) for r in reports),
        )

    names = list(functions)
    length = min(4, n_max)
    word_gap = 0.0
    for size in range(1, length + 1):
        for word in itertools.product(list(OperatorPart), repeat=size):
            chosen = [functions[names[i % len(names)]] for i in range(size)]
            ext = word_moment(word, chosen, Representation.EXTENDED, coeffs)
            std = word_moment(word, chosen, Representation.STANDARD, coeffs)
            word_gap = max(word_gap, _gap(ext, std, max(1.0, abs(ext))))
    suite.record("word_moments", word_gap, tolerances.relative)

    report.checks = suite.checks
    return report
