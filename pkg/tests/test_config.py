import logging
from pathlib import Path

import pytest

from levyfock.config import ExperimentConfig, Truncation, parse_config, parse_string, validate, with_overrides
from levyfock.enums import FunctionPreset, GridPreset, MeasureKind, MeasurePreset
from levyfock.exceptions import ConfigError
from levyfock.experiment import Experiment
from levyfock.extfock import Composition

TEST_CONFIG_DIR = Path(__file__).parent / "data"

VALID_CONFIGS = ["two_point.xml", "three_point.xml", "laguerre.xml", "explicit_nu.xml"]


@pytest.mark.parametrize("config_file", VALID_CONFIGS)
def test_config_parsing(config_file: str) -> None:
    """Every valid test config parses and satisfies the truncation invariants."""
    config = parse_config(TEST_CONFIG_DIR / config_file)

    truncation = config.truncation
    assert truncation.ell >= truncation.levels + 1, f"{config_file}: ℓ₂ truncation too small"
    assert config.functions, f"{config_file}: no test functions"


def test_canonical_config() -> None:
    config = parse_config(TEST_CONFIG_DIR / "two_point.xml")

    assert config.measure.preset is MeasurePreset.TWO_POINT_SYMMETRIC
    assert config.measure.params == {"jump": "1.0"}
    assert config.grid.preset is GridPreset.SINGLE_POINT
    assert config.truncation == Truncation(jacobi=8, levels=6, ell=7)
    assert config.tolerances.trials == 100
    assert config.seed == 20240601
    assert config.output_dir == Path("out")


def test_truncation_defaults_follow_levels() -> None:
    config = parse_config(TEST_CONFIG_DIR / "three_point.xml")

    assert config.truncation == Truncation(jacobi=8, levels=4, ell=5)
    assert config.functions[0].values == (0.5, -1.25)
    assert config.functions[1].preset is FunctionPreset.RANDOM


def test_small_truncations_are_raised(caplog: pytest.LogCaptureFixture) -> None:
    """K is raised to n_max + 1 with a warning; the Jacobi order N is kept."""
    with caplog.at_level(logging.WARNING, logger="levyfock.config"):
        config = parse_config(TEST_CONFIG_DIR / "explicit_nu.xml")

    assert config.truncation == Truncation(jacobi=2, levels=3, ell=4)
    messages = " ".join(record.message for record in caplog.records)
    assert "raised to 4" in messages


def test_short_recurrence_is_extended_for_the_fock_operators() -> None:
    """N < K keeps N rows in the coefficient table while the field operators get K levels."""
    config = parse_string(
        '<experiment><measure preset="gamma"/><truncation jacobi="2" levels="4"/></experiment>'
    )
    experiment = Experiment(config)

    assert config.truncation == Truncation(jacobi=2, levels=4, ell=5)
    assert len(experiment.coefficient_table()) == 2
    assert experiment.field_coeffs.order == 5
    assert experiment.field_coeffs.b_at(1) == pytest.approx(experiment.coeffs.b_at(1))


def test_explicit_atoms() -> None:
    config = parse_config(TEST_CONFIG_DIR / "explicit_nu.xml")

    assert config.measure.preset is None
    assert config.measure.kind is MeasureKind.NU
    assert config.measure.atoms == ((2.0, 0.25), (-1.0, 1.0))
    assert config.grid.weights == (0.5, 1.5)


def test_invalid_truncation() -> None:
    with pytest.raises(ConfigError) as excinfo:
        parse_config(TEST_CONFIG_DIR / "invalid_jacobi.xml")
    assert excinfo.value.field == "experiment/truncation@jacobi"


def test_malformed_xml() -> None:
    with pytest.raises(ConfigError, match="invalid XML"):
        parse_config(TEST_CONFIG_DIR / "malformed.xml")


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "absent.xml")
    with pytest.raises(ConfigError, match="not a file"):
        parse_config(tmp_path)


@pytest.mark.parametrize(
    ("document", "field"),
    [
        ("<config/>", "config"),
        ('<experiment seed="x"/>', "experiment@seed"),
        ('<experiment><measure preset="cauchy"/></experiment>', "experiment/measure@preset"),
        (
            '<experiment><measure preset="gamma"><param name="jump">1</param></measure></experiment>',
            "experiment/measure/param@name",
        ),
        ('<experiment><measure kind="nu"/></experiment>', "experiment/measure"),
        ('<experiment><measure><atom s="1"/></measure></experiment>', "experiment/measure/atom"),
        ('<experiment><grid preset="single_point" points="2"/></experiment>', "experiment/grid@points"),
        ('<experiment><grid preset="uniform" points="2" mass="0"/></experiment>', "experiment/grid@mass"),
        ('<experiment><grid><point weight="-1"/></grid></experiment>', "experiment/grid/point@weight"),
        ("<experiment><functions/></experiment>", "experiment/functions"),
        (
            '<experiment><functions><function name="f"/><function name="f"/></functions></experiment>',
            "experiment/functions/function@name",
        ),
        (
            '<experiment><functions><function name="f" values="1 x"/></functions></experiment>',
            "experiment/functions/function@values",
        ),
        ('<experiment><truncation levels="0"/></experiment>', "experiment/truncation@levels"),
        ('<experiment><tolerances relative="-1"/></experiment>', "experiment/tolerances@relative"),
        ('<experiment><tolerances trials="0"/></experiment>', "experiment/tolerances@trials"),
        ('<experiment><output dir=""/></experiment>', "experiment/output@dir"),
    ],
)
def test_invalid_field(document: str, field: str) -> None:
    """Each invalid field is reported with its path."""
    with pytest.raises(ConfigError) as excinfo:
        parse_string(document)
    assert excinfo.value.field == field, f"Reported {excinfo.value.field!r}"


def test_defaults_are_valid() -> None:
    config = validate(ExperimentConfig())

    assert config.truncation == Truncation(jacobi=8, levels=6, ell=7)


def test_level_override_moves_ell() -> None:
    config = with_overrides(validate(ExperimentConfig()), levels=3)

    assert config.truncation == Truncation(jacobi=8, levels=3, ell=4)


def test_overrides_are_validated() -> None:
    with pytest.raises(ConfigError):
        with_overrides(validate(ExperimentConfig()), levels=0)


def test_output_directory_precedence(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Flag over environment over config."""
    config = validate(ExperimentConfig())
    monkeypatch.setenv("LEVYFOCK_OUT_DIR", str(tmp_path / "env"))

    assert with_overrides(config).output_dir == tmp_path / "env"
    assert with_overrides(config, output_dir=tmp_path / "flag").output_dir == tmp_path / "flag"

    monkeypatch.delenv("LEVYFOCK_OUT_DIR")
    assert with_overrides(config).output_dir == Path("out")


def test_experiment_from_explicit_levy_measure() -> None:
    """ν̃ of ν = ¼δ₂ + δ₋₁ has mass 2, which multiplies the grid weights."""
    experiment = Experiment.from_file(TEST_CONFIG_DIR / "explicit_nu.xml")

    assert experiment.model.scale == pytest.approx(2.0)
    assert experiment.grid.weights.tolist() == pytest.approx([1.0, 3.0])
    assert experiment.functions["h"].values.tolist() == [1.0, -2.0]


def test_default_experiment_tables() -> None:
    experiment = Experiment(validate(ExperimentConfig()))

    assert experiment.coefficient_table() == [(0, 0.0, 0.0), (1, 0.0, 1.0)]
    gram = experiment.gram_table()
    assert len(gram) == 30, "Compositions of weight 0 … 6"
    assert gram[0] == (Composition(), 1.0)


def test_experiment_rejects_bad_parameter() -> None:
    config = parse_string(
        '<experiment><measure preset="poisson"><param name="jump">abc</param></measure></experiment>'
    )

    with pytest.raises(ConfigError) as excinfo:
        Experiment(config)
    assert excinfo.value.field == "experiment/measure/param[jump]"


def test_experiment_rejects_function_size() -> None:
    config = parse_string(
        '<experiment><grid preset="uniform" points="2"/>'
        '<functions><function name="f" values="1 2 3"/></functions></experiment>'
    )

    with pytest.raises(ConfigError):
        Experiment(config)
