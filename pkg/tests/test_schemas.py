import pytest
from pydantic import ValidationError

from src.schemas.schemas import CheckResult
from src.schemas.schemas import ExperimentConfig
from src.schemas.schemas import SuiteReport
from src.schemas.schemas import Verdict


def _config(**overrides) -> dict:
    document = {
        "schema_version": 1,
        "scenario": "minimal",
        "graph": {"builder": "path", "size": 3, "dim": 1},
        "functionals": [{"kind": "H", "combine": "rss"}],
        "exponents": [2.0],
        "budget": 8,
        "seed": 0,
    }
    document.update(overrides)
    return document


def _result(verdict: Verdict, exact: bool = True) -> CheckResult:
    return CheckResult(check_id="c", inputs_digest="d", verdict=verdict, tolerance=1e-9, exact=exact)


def test_minimal_config_is_valid():
    config = ExperimentConfig.model_validate(_config())

    assert config.graph.builder == "path"
    assert config.potential.kind == "zero"
    assert config.output.format == "both"
    assert config.functionals[0].multipliers[0].kind == "constant"


def test_missing_seed_is_rejected():
    document = _config()
    del document["seed"]

    with pytest.raises(ValidationError) as caught:
        ExperimentConfig.model_validate(document)

    assert caught.value.errors()[0]["loc"] == ("seed",)


def test_unknown_kind_reports_its_location():
    with pytest.raises(ValidationError) as caught:
        ExperimentConfig.model_validate(_config(functionals=[{"kind": "BAD"}]))

    assert caught.value.errors()[0]["loc"][:3] == ("functionals", 0, "kind")


@pytest.mark.parametrize(
    "overrides",
    [
        {"unexpected": True},
        {"exponents": [1.0]},
        {"exponents": []},
        {"schema_version": 2},
        {"graph": {"builder": "torus", "size": 4}},
        {"graph": {"builder": "grid", "size": 1}},
        {"budget": 0},
        {"seed": -1},
        {"output": {"format": "xml"}},
    ],
)
def test_invalid_configs(overrides):
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate(_config(**overrides))


def test_violation_requires_exact_statement():
    with pytest.raises(ValidationError):
        _result(Verdict.VIOLATION, exact=False)

    assert _result(Verdict.VIOLATION).verdict is Verdict.VIOLATION
    assert _result(Verdict.OBSERVE, exact=False).verdict is Verdict.OBSERVE


def test_runtime_is_excluded_from_dumps():
    result = CheckResult(
        check_id="c", inputs_digest="d", verdict=Verdict.PASS, tolerance=0.0, runtime=3.5
    )

    assert result.runtime == 3.5
    assert "runtime" not in result.model_dump()
    assert "runtime" not in result.model_dump_json()


def test_suite_report_counts():
    report = SuiteReport(
        suite="quick",
        seed=0,
        tool_version="1.0.0",
        config_digest="x",
        results=[_result(Verdict.PASS), _result(Verdict.OBSERVE, exact=False), _result(Verdict.PASS)],
    )

    assert report.counts() == {"pass": 2, "observe": 1, "violation": 0}
    assert not report.has_violation

    report.results.append(_result(Verdict.VIOLATION))
    assert report.has_violation
