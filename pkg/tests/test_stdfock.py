import logging
import math

import numpy as np
import pytest

from levyfock.enums import OperatorPart
from levyfock.exceptions import GridMismatchError, TruncationError
from levyfock.grid import FieldFunction, SpaceGrid, inner
from levyfock.measure import gamma, three_point_asymmetric, two_point_symmetric
from levyfock.orthopoly import JacobiCoeffs, stieltjes
from levyfock.stdfock import (
    A_apply,
    A_component,
    A_minus,
    A_plus,
    A_zero,
    FockLayout,
    FockVector,
    a_minus,
    a_plus,
    basis_vector,
    d_gamma,
    dumps,
    fock_inner,
    fock_norm,
    product_vector_components,
    random_fock_vector,
    single_particle,
    single_particle_inner,
    tensor_power,
)

TWO_POINT = stieltjes(two_point_symmetric(), 8)
THREE_POINT = stieltjes(three_point_asymmetric(), 8)
GAMMA = stieltjes(gamma(64), 8)


@pytest.fixture
def layout() -> FockLayout:
    return FockLayout(3, SpaceGrid.from_weights([0.7, 1.3]), 4)


def test_layout_sizes(layout: FockLayout) -> None:
    """Level m holds C(D + m − 1, m) multisets over D = K·M single-particle indices."""
    assert layout.dim == 6
    for m in range(5):
        assert layout.level_size(m) == math.comb(6 + m - 1, m), f"Level {m}"
    assert layout.weights.tolist() == pytest.approx([0.7, 1.3] * 3)


def test_level_bases_are_logged_once(caplog: pytest.LogCaptureFixture) -> None:
    layout = FockLayout(13, SpaceGrid.single_point(), 2)
    with caplog.at_level(logging.DEBUG, logger="levyfock.stdfock"):
        layout.basis(2)
        layout.basis(2)

    messages = [record.message for record in caplog.records if "basis" in record.message]
    assert messages == ["Level 2 basis over 13 single-particle indices: 91 multisets"]


@pytest.mark.parametrize("n", range(5))
def test_normative_identity(layout: FockLayout, n: int) -> None:
    """⟨h^⊗n, g^⊗n⟩ = n!·⟨h, g⟩ⁿ."""
    rng = np.random.default_rng(n)
    h, g = rng.standard_normal(layout.dim), rng.standard_normal(layout.dim)

    expected = math.factorial(n) * single_particle_inner(layout, h, g) ** n
    value = fock_inner(tensor_power(layout, h, n), tensor_power(layout, g, n))
    assert value == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_creation_from_vacuum(layout: FockLayout) -> None:
    h = np.arange(1.0, 7.0)
    created = a_plus(h, FockVector.vacuum(layout))

    np.testing.assert_allclose(created.levels[1], h)
    assert created.top_level() == 1
    assert fock_norm(a_plus(h, created)) ** 2 == pytest.approx(2 * single_particle_inner(layout, h, h) ** 2)


def test_annihilation_of_tensor_square(layout: FockLayout) -> None:
    """a⁻(h)g^⊗2 = 2⟨h, g⟩·g."""
    rng = np.random.default_rng(5)
    h, g = rng.standard_normal(layout.dim), rng.standard_normal(layout.dim)

    lowered = a_minus(h, tensor_power(layout, g, 2))
    np.testing.assert_allclose(lowered.levels[1], 2 * single_particle_inner(layout, h, g) * g)
    assert not np.any(a_minus(h, FockVector.vacuum(layout)).levels[0])


def test_creation_and_annihilation_are_adjoint(layout: FockLayout) -> None:
    rng = np.random.default_rng(6)
    for _ in range(100):
        h = rng.standard_normal(layout.dim)
        f = random_fock_vector(layout, range(4), rng)
        g = random_fock_vector(layout, range(5), rng)
        created, annihilated = a_plus(h, f), a_minus(h, g)
        scale = fock_norm(created) * fock_norm(g) + fock_norm(f) * fock_norm(annihilated)

        left = fock_inner(created, g)
        right = fock_inner(f, annihilated)
        assert left == pytest.approx(right, rel=1e-10, abs=1e-10 * (1.0 + scale))


def test_second_quantization_of_identity(layout: FockLayout) -> None:
    """dΓ(1) multiplies level m by m."""
    v = random_fock_vector(layout, range(5), np.random.default_rng(7))
    counted = d_gamma(np.eye(layout.dim), v)

    for m in range(5):
        np.testing.assert_allclose(counted.levels[m], m * v.levels[m])


def test_second_quantization_on_tensor_power(layout: FockLayout) -> None:
    """dΓ(T)g^⊗3 = 3·(Tg) ⊗̂ g^⊗2."""
    rng = np.random.default_rng(8)
    operator = rng.standard_normal((layout.dim, layout.dim))
    g = rng.standard_normal(layout.dim)

    value = d_gamma(operator, tensor_power(layout, g, 3))
    expected = a_plus(operator @ g, tensor_power(layout, g, 2)).scaled(3.0)
    np.testing.assert_allclose(value.levels[3], expected.levels[3], rtol=1e-12, atol=1e-12)


def test_second_quantization_preserves_symmetry(layout: FockLayout) -> None:
    """dΓ(T) is symmetric whenever T is symmetric for the weighted single-particle product."""
    rng = np.random.default_rng(9)
    s = rng.standard_normal((layout.dim, layout.dim))
    operator = np.diag(1.0 / layout.weights) @ (s + s.T)
    u = random_fock_vector(layout, range(5), rng)
    w = random_fock_vector(layout, range(5), rng)

    assert fock_inner(d_gamma(operator, u), w) == pytest.approx(fock_inner(u, d_gamma(operator, w)), rel=1e-10)


def test_field_on_vacuum(layout: FockLayout) -> None:
    """A(φ)Ω = e₀ ⊗ φ, and ⟨Ω, A(φ)²Ω⟩ = ‖φ‖²."""
    phi = FieldFunction(layout.grid, np.array([0.5, -2.0]))
    vacuum = FockVector.vacuum(layout)

    once = A_apply(phi, vacuum, GAMMA)
    np.testing.assert_allclose(once.levels[1], single_particle(layout, basis_vector(layout, 0), phi))
    assert fock_norm(A_zero(phi, vacuum, GAMMA)) == 0.0
    assert fock_norm(A_minus(phi, vacuum, GAMMA)) == 0.0
    assert fock_inner(vacuum, A_apply(phi, once, GAMMA)) == pytest.approx(inner(phi, phi))


@pytest.mark.parametrize("coeffs", [TWO_POINT, THREE_POINT, GAMMA], ids=["two_point", "three_point", "gamma"])
def test_field_is_symmetric(layout: FockLayout, coeffs: JacobiCoeffs) -> None:
    rng = np.random.default_rng(10)
    for _ in range(50):
        phi = FieldFunction.random(layout.grid, rng)
        u = random_fock_vector(layout, range(4), rng)
        w = random_fock_vector(layout, range(4), rng)
        au, aw = A_apply(phi, u, coeffs, strict=False), A_apply(phi, w, coeffs, strict=False)
        scale = fock_norm(au) * fock_norm(w) + fock_norm(u) * fock_norm(aw)

        left = fock_inner(au, w)
        right = fock_inner(u, aw)
        assert left == pytest.approx(right, rel=1e-10, abs=1e-10 * (1.0 + scale))


@pytest.mark.parametrize("coeffs", [THREE_POINT, GAMMA], ids=["three_point", "gamma"])
def test_fields_commute(layout: FockLayout, coeffs: JacobiCoeffs) -> None:
    rng = np.random.default_rng(11)
    for _ in range(50):
        phi, psi = FieldFunction.random(layout.grid, rng), FieldFunction.random(layout.grid, rng)
        v = random_fock_vector(layout, range(3), rng)

        forward = A_apply(phi, A_apply(psi, v, coeffs, strict=False), coeffs, strict=False)
        backward = A_apply(psi, A_apply(phi, v, coeffs, strict=False), coeffs, strict=False)
        assert fock_norm(forward - backward) <= 1e-10 * (fock_norm(forward) + fock_norm(backward))


def test_field_assembly_paths_agree(layout: FockLayout) -> None:
    """A⁺ + A⁰ + A⁻ equals a⁺(e₀⊗φ) + dΓ(J⊗M_φ) + a⁻(e₀⊗φ)."""
    rng = np.random.default_rng(12)
    phi = FieldFunction.random(layout.grid, rng)
    v = random_fock_vector(layout, range(4), rng)

    split = A_apply(phi, v, GAMMA, strict=False)
    direct = A_apply(phi, v, GAMMA, strict=False, direct=True)
    assert fock_norm(split - direct) <= 1e-12 * fock_norm(split)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("coeffs", [THREE_POINT, GAMMA], ids=["three_point", "gamma"])
def test_product_vector_components(layout: FockLayout, coeffs: JacobiCoeffs, n: int) -> None:
    """Each field component on (ξ⊗ψ)^⊗n matches its explicit product-vector formula."""
    rng = np.random.default_rng(n)
    phi, psi = FieldFunction.random(layout.grid, rng), FieldFunction.random(layout.grid, rng)
    xi = rng.standard_normal(layout.ell)
    product = tensor_power(layout, single_particle(layout, xi, psi), n)

    formulas = product_vector_components(phi, xi, psi, n, coeffs, layout)
    assert set(formulas) == set(OperatorPart)
    for part, expected in formulas.items():
        assembled = A_component(part, phi, product, coeffs, strict=False)
        assert fock_norm(assembled - expected) <= 1e-12 * max(fock_norm(expected), 1.0), f"A{part}"


def test_product_formulas_need_a_free_level(layout: FockLayout) -> None:
    phi = FieldFunction.constant(layout.grid)

    with pytest.raises(TruncationError):
        product_vector_components(phi, np.ones(3), phi, 4, GAMMA, layout)


def test_strict_creation_guards_top_index() -> None:
    """A populated top ℓ₂ index with b_K ≠ 0 cannot be raised inside the truncation."""
    layout = FockLayout(2, SpaceGrid.single_point(), 3)
    phi = FieldFunction.constant(layout.grid)
    top = tensor_power(layout, single_particle(layout, basis_vector(layout, 1), phi), 1)

    with pytest.raises(TruncationError):
        A_plus(phi, top, GAMMA)
    A_plus(phi, top, GAMMA, strict=False)
    A_plus(phi, top, TWO_POINT)


def test_creation_past_top_level(layout: FockLayout) -> None:
    h = np.ones(layout.dim)

    with pytest.raises(TruncationError):
        a_plus(h, tensor_power(layout, h, 4))


def test_shape_mismatches(layout: FockLayout) -> None:
    with pytest.raises(GridMismatchError):
        a_plus(np.ones(5), FockVector.vacuum(layout))
    with pytest.raises(GridMismatchError):
        d_gamma(np.eye(5), FockVector.vacuum(layout))
    with pytest.raises(GridMismatchError):
        FockVector.vacuum(layout) + FockVector.vacuum(FockLayout(2, layout.grid, 4))
    with pytest.raises(GridMismatchError):
        single_particle(layout, np.ones(3), FieldFunction.constant(SpaceGrid.uniform(3)))


def test_restricted_random_vector(layout: FockLayout) -> None:
    """With ``ell_below`` no multiset touches the excluded ℓ₂ indices."""
    v = random_fock_vector(layout, range(5), np.random.default_rng(13), ell_below=2)

    for m in range(1, 5):
        touched = np.any(layout.basis(m) // layout.grid.size >= 2, axis=1)
        assert not np.any(v.levels[m][touched]), f"Level {m}"


def test_dump_format() -> None:
    layout = FockLayout(1, SpaceGrid.single_point(), 1)

    assert dumps(FockVector.vacuum(layout)) == "# standard n_max=1 ell=1 points=1\n0\t\t1\n1\t0.0\t0\n"
