import itertools
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
import sympy

from levyfock.enums import NegativeControl, OperatorPart, Representation
from levyfock.exceptions import OracleError
from levyfock.experiment import Experiment
from levyfock.grid import FieldFunction, SpaceGrid, inner
from levyfock.measure import LevyModel, gamma, pascal, poisson, three_point_asymmetric, two_point_symmetric
from levyfock.orthopoly import JacobiCoeffs, stieltjes
from levyfock.verify import (
    Tolerances,
    composition_polynomial,
    control_gap,
    cumulants,
    hankel_determinant,
    hankel_identity_gap,
    inputs_digest,
    mixed_moments,
    moment_reports,
    moments_from_cumulants,
    property_suite,
    scalar_law_moments,
    vacuum_moments_ext,
    vacuum_moments_std,
    wick_norm_oracle,
    word_moment,
)

TEST_CONFIG_DIR = Path(__file__).parent / "data"

GAUSSIAN_MOMENTS = [1, 0, 1, 0, 3, 0, 15, 0, 105, 0, 945]

MODELS = {
    "two_point": two_point_symmetric(),
    "three_point": three_point_asymmetric(),
    "gamma": gamma(32),
    "poisson": poisson(2.0, 0.5),
    "pascal": pascal(0.5, 20),
}

MEIXNER_MODELS = {
    "gamma": gamma(32),
    "poisson": poisson(2.0, 0.5),
    "pascal": pascal(0.5, 120),
}


@pytest.fixture
def unit_point() -> FieldFunction:
    return FieldFunction.constant(SpaceGrid.single_point())


def test_cumulants_of_two_point_noise(unit_point: FieldFunction) -> None:
    """κₘ = m̃ₘ₋₂ for φ = 1 on a unit point."""
    assert cumulants(unit_point, two_point_symmetric(), 6) == [0.0, 1.0, 0.0, 1.0, 0.0, 1.0]


@pytest.mark.parametrize(
    ("kappa", "expected"),
    [
        ([0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 1.0, 0.0, 3.0]),
        ([0.0, 1.0, 0.0, 1.0], [1.0, 0.0, 1.0, 0.0, 4.0]),
        ([0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]),
    ],
)
def test_moments_from_cumulants(kappa: list[float], expected: list[float]) -> None:
    assert moments_from_cumulants(kappa) == expected


@pytest.mark.parametrize("n", range(1, 9))
def test_constant_cumulants_give_touchard_polynomials(n: int) -> None:
    """Cumulants all equal to λ are those of a Poisson law, whose moments are Bell polynomials."""
    rate = 1.5
    expected = float(sympy.bell(n, sympy.Rational(3, 2)))

    assert moments_from_cumulants([rate] * n)[n] == pytest.approx(expected, rel=1e-13)


def test_scalar_law_moments_are_exact() -> None:
    moments = scalar_law_moments(two_point_symmetric(), 1.0, 4)

    assert moments == [Fraction(1), Fraction(0), Fraction(1), Fraction(0), Fraction(4)]
    assert all(isinstance(m, Fraction) for m in moments)


def test_hankel_determinant() -> None:
    assert hankel_determinant([1, 0, 1], 1) == 1
    assert hankel_determinant([1, 0, 1, 0, 3], 2) == 2
    with pytest.raises(ValueError):
        hankel_determinant([1, 0], 1)


@pytest.mark.parametrize("n", range(6))
def test_wick_oracle_of_gaussian(n: int) -> None:
    """Monic Hermite polynomials have ‖Heₙ‖² = n!."""
    assert wick_norm_oracle(GAUSSIAN_MOMENTS, n) == pytest.approx(math.factorial(n))


def test_wick_oracle_example() -> None:
    assert wick_norm_oracle([1, 0, 1, 0, 4], 2) == pytest.approx(3.0)


def test_wick_oracle_on_finite_support() -> None:
    """The ±1 law has only two support points, so its order-2 Hankel matrix is singular."""
    with pytest.raises(OracleError) as excinfo:
        wick_norm_oracle([1, 0, 1, 0, 1], 2)
    assert excinfo.value.order == 2


@pytest.mark.parametrize(("n", "expected"), [(1, 1.0), (2, 1.5), (3, 2.5)])
def test_composition_polynomial_two_point(n: int, expected: float) -> None:
    """Σ K_α at t = 1 with b₁ = 1 and b₂ = 0."""
    coeffs = stieltjes(two_point_symmetric(), 8)

    assert composition_polynomial(n, coeffs, 1.0) == pytest.approx(expected)


@pytest.mark.parametrize("name", list(MODELS))
@pytest.mark.parametrize("t", [0.25, 1.0, 2.0])
def test_hankel_identity_low_orders(name: str, t: float) -> None:
    """(1/n!)‖:Yⁿ:‖² = Σ_α K_α t^|α| on a one-point grid of weight t, for any measure up to n = 3."""
    model = MODELS[name]
    coeffs = stieltjes(model, 8)

    for n in range(1, 4):
        gap = hankel_identity_gap(model, coeffs, n, t)
        assert gap <= 1e-8, f"{name}, n = {n}, t = {t}: gap {gap:.3e}"


@pytest.mark.parametrize("name", list(MEIXNER_MODELS))
@pytest.mark.parametrize("t", [0.25, 1.0, 2.0])
def test_hankel_identity_meixner(name: str, t: float) -> None:
    """Gamma, Poisson and Pascal noise satisfy the identity up to n = 5."""
    model = MEIXNER_MODELS[name]
    coeffs = stieltjes(model, 8)

    for n in range(1, 6):
        gap = hankel_identity_gap(model, coeffs, n, t)
        assert gap <= 1e-8, f"{name}, n = {n}, t = {t}: gap {gap:.3e}"


def test_hankel_identity_breaks_for_two_point_noise() -> None:
    """At n = 4 the Wick norm is 5 while the compositions only reach 1 + 3 + 0.75."""
    model = two_point_symmetric()
    coeffs = stieltjes(model, 8)

    assert composition_polynomial(4, coeffs, 1.0) == pytest.approx(4.75)
    assert hankel_identity_gap(model, coeffs, 4, 1.0) == pytest.approx(0.05)


@pytest.mark.parametrize("split", [True, False])
def test_canonical_vacuum_moments(unit_point: FieldFunction, split: bool) -> None:
    """φ = 1 on a unit point under the two-point measure: moments 1, 0, 1, 0, 4."""
    coeffs = stieltjes(two_point_symmetric(), 8)

    assert vacuum_moments_ext(unit_point, coeffs, 4, split=split) == pytest.approx([1.0, 0.0, 1.0, 0.0, 4.0])
    assert vacuum_moments_std(unit_point, coeffs, 4, split=split) == pytest.approx([1.0, 0.0, 1.0, 0.0, 4.0])


@pytest.mark.parametrize("name", ["two_point", "three_point", "gamma", "pascal"])
@pytest.mark.parametrize("points", [1, 2, 3])
def test_triple_agreement(name: str, points: int) -> None:
    """Extended, standard and cumulant moments agree up to order six."""
    model = MODELS[name]
    coeffs = stieltjes(model, 8)
    grid = SpaceGrid.uniform(points, 1.5, sigma_scale=model.scale)
    rng = np.random.default_rng(points)
    tolerances = Tolerances()

    for _ in range(2):
        phi = FieldFunction.random(grid, rng)
        for report in moment_reports(phi, model, coeffs, 6, ell=7):
            assert report.agrees(tolerances), (
                f"{name}, k = {report.order}: {report.extended}, {report.standard}, {report.oracle}"
            )


def test_second_mixed_moment_is_covariance() -> None:
    grid = SpaceGrid.uniform(3)
    rng = np.random.default_rng(3)
    phi, psi = FieldFunction.random(grid, rng), FieldFunction.random(grid, rng)
    coeffs = stieltjes(three_point_asymmetric(), 8)

    for representation in Representation:
        value = mixed_moments([phi, psi], representation, coeffs)
        assert value == pytest.approx(inner(phi, psi)), f"{representation}"


def test_third_mixed_moment_is_joint_cumulant() -> None:
    """E⟨ω,φ₁⟩⟨ω,φ₂⟩⟨ω,φ₃⟩ = m̃₁·Σᵢ φ₁φ₂φ₃σᵢ."""
    model = three_point_asymmetric()
    coeffs = stieltjes(model, 8)
    grid = SpaceGrid.uniform(2)
    rng = np.random.default_rng(4)
    functions = [FieldFunction.random(grid, rng) for _ in range(3)]
    expected = model.moment(1) * float(np.sum(np.prod([f.values for f in functions], axis=0) * grid.weights))

    for representation in Representation:
        assert mixed_moments(functions, representation, coeffs) == pytest.approx(expected), f"{representation}"


def test_fourth_mixed_moments_agree() -> None:
    coeffs = stieltjes(gamma(32), 8)
    grid = SpaceGrid.uniform(2)
    rng = np.random.default_rng(5)
    functions = [FieldFunction.random(grid, rng) for _ in range(4)]

    extended = mixed_moments(functions, Representation.EXTENDED, coeffs)
    standard = mixed_moments(functions, Representation.STANDARD, coeffs)
    assert extended == pytest.approx(standard, rel=1e-10)


def test_neutral_word_moment() -> None:
    """⟨Ω, X⁻X⁰X⁺Ω⟩ = a₀·Σφ³σ in both representations."""
    coeffs = stieltjes(three_point_asymmetric(), 8)
    grid = SpaceGrid.from_weights([0.5, 1.5])
    phi = FieldFunction(grid, np.array([1.0, -2.0]))
    word = [OperatorPart.ANNIHILATION, OperatorPart.NEUTRAL, OperatorPart.CREATION]
    expected = coeffs.a[0] * float(np.sum(phi.values**3 * grid.weights))

    for representation in Representation:
        assert word_moment(word, [phi] * 3, representation, coeffs) == pytest.approx(expected)


def test_word_moments_agree() -> None:
    """Every word of length at most three has the same vacuum moment in both representations."""
    coeffs = stieltjes(three_point_asymmetric(), 8)
    grid = SpaceGrid.uniform(2)
    rng = np.random.default_rng(6)
    functions = [FieldFunction.random(grid, rng) for _ in range(3)]

    for size in range(1, 4):
        for word in itertools.product(list(OperatorPart), repeat=size):
            chosen = functions[:size]
            extended = word_moment(word, chosen, Representation.EXTENDED, coeffs)
            standard = word_moment(word, chosen, Representation.STANDARD, coeffs)
            assert extended == pytest.approx(standard, rel=1e-10, abs=1e-12), "".join(word)


def test_word_needs_one_function_per_letter() -> None:
    coeffs = stieltjes(two_point_symmetric(), 8)

    with pytest.raises(ValueError):
        word_moment([OperatorPart.CREATION], [], Representation.EXTENDED, coeffs)


def test_odd_moments_vanish_for_symmetric_measure() -> None:
    coeffs = stieltjes(two_point_symmetric(), 8)
    phi = FieldFunction(SpaceGrid.uniform(2), np.array([1.0, -0.5]))

    for k, value in enumerate(vacuum_moments_std(phi, coeffs, 5)):
        if k % 2:
            assert abs(value) <= 1e-13, f"k = {k}"


@pytest.mark.parametrize("control", list(NegativeControl))
def test_negative_controls_break_agreement(unit_point: FieldFunction, control: NegativeControl) -> None:
    """A one percent perturbation of any single coefficient family is detected."""
    model = three_point_asymmetric()
    coeffs = stieltjes(model, 8)

    assert control_gap(control, unit_point, model, coeffs, relative=0.0) <= 1e-12
    assert control_gap(control, unit_point, model, coeffs) > 1e-4, f"{control} went unnoticed"


def test_inputs_digest_is_canonical() -> None:
    assert inputs_digest({"a": 1, "b": [1.0, 2.0]}) == inputs_digest({"b": [1.0, 2.0], "a": 1})
    assert inputs_digest({"a": 1}) != inputs_digest({"a": 2})


def test_canonical_suite_passes() -> None:
    experiment = Experiment.from_file(TEST_CONFIG_DIR / "two_point.xml")
    report = experiment.verify()

    assert report.passed, f"Failed checks: {[check.name for check in report.failures]}"
    names = {check.name for check in report.checks}
    for expected in (
        "quadrature_exactness",
        "ext_adjointness",
        "hankel_identity",
        "std_commutator",
        "normative_identity",
        "product_formulas",
        "moments[one]",
        "word_moments",
    ):
        assert expected in names, f"Missing check {expected}"
    assert all(check.inputs_digest == report.inputs_digest for check in report.checks)

    payload = json.loads(report.to_json())
    assert payload["passed"] is True
    fourth = next(row for row in payload["moments"] if row["k"] == 4)
    assert fourth["cumulant_oracle"] == pytest.approx(4.0)


@pytest.mark.parametrize("config_file", ["three_point.xml", "laguerre.xml"])
def test_suite_passes(config_file: str) -> None:
    report = Experiment.from_file(TEST_CONFIG_DIR / config_file).verify()

    assert report.passed, f"{config_file}: failed checks {[check.name for check in report.failures]}"


def test_suite_reports_perturbed_coefficients() -> None:
    """Coefficients that do not belong to the measure fail the suite without raising."""
    model = three_point_asymmetric()
    coeffs = stieltjes(model, 8)
    wrong = JacobiCoeffs(a=coeffs.a, b=tuple(1.05 * b for b in coeffs.b), terminated=True)
    grid = SpaceGrid.uniform(2)
    functions = {"phi": FieldFunction(grid, np.array([1.0, 0.5]))}

    report = property_suite(model, wrong, functions, n_max=4, ell=5, tolerances=Tolerances(trials=1))

    failed = {check.name for check in report.failures}
    assert not report.passed
    assert {"hankel_identity", "moments[phi]", "quadrature_exactness"} <= failed, f"Failed: {failed}"
    assert "ext_adjointness" not in failed, "Operator identities hold for any coefficients"


def test_suite_needs_a_function() -> None:
    coeffs = stieltjes(two_point_symmetric(), 8)

    with pytest.raises(ValueError):
        property_suite(two_point_symmetric(), coeffs, {}, n_max=2, ell=3)


def test_model_scale_enters_grid() -> None:
    """The Poisson process of intensity ½ and jump 2 has variance 2 on a unit point."""
    model: LevyModel = poisson(2.0, 0.5)
    coeffs = stieltjes(model, 8)
    phi = FieldFunction.constant(SpaceGrid.single_point(sigma_scale=model.scale))

    assert vacuum_moments_ext(phi, coeffs, 2)[2] == pytest.approx(2.0)
