import os

import pytest
import yaml
from typer.testing import CliRunner

from src import __version__
from src.main import app

runner = CliRunner()


def _write_config(tmp_path, **overrides) -> str:
    document = {
        "schema_version": 1,
        "scenario": "minimal",
        "graph": {"builder": "path", "size": 3, "dim": 1},
        "functionals": [{"kind": "H", "combine": "rss"}],
        "exponents": [2.0],
        "budget": 8,
        "seed": 0,
        "output": {"directory": str(tmp_path / "reports"), "format": "both"},
    }
    document.update(overrides)
    target = tmp_path / "config.yaml"
    target.write_text(yaml.safe_dump(document), encoding="utf-8")
    return str(target)


def _read_all(directory) -> dict:
    contents = {}
    for name in sorted(os.listdir(directory)):
        with open(os.path.join(directory, name), "rb") as file:
            contents[name] = file.read()
    return contents


def test_run_minimal_config(tmp_path):
    config = _write_config(tmp_path)

    first = runner.invoke(app, ["run", config])
    assert first.exit_code == 0, first.output
    written = _read_all(tmp_path / "reports")
    assert set(written) == {
        "minimal_functionals.csv",
        "minimal_functionals.json",
        "minimal_summary.csv",
        "minimal_summary.json",
    }
    assert written["minimal_functionals.csv"].startswith(b"tool_version,config_digest,")

    second = runner.invoke(app, ["run", config])
    assert second.exit_code == 0, second.output
    assert _read_all(tmp_path / "reports") == written


@pytest.mark.parametrize(
    "overrides",
    [
        {"functionals": [{"kind": "BAD"}]},
        {"seed": None},
        {"exponents": [1.0]},
        {"graph": {"builder": "grid", "size": 40, "dim": 2}, "vertex_cap": 100},
    ],
)
def test_run_rejects_invalid_config(overrides, tmp_path):
    result = runner.invoke(app, ["run", _write_config(tmp_path, **overrides)])

    assert result.exit_code == 2


def test_run_missing_file(tmp_path):
    assert runner.invoke(app, ["run", str(tmp_path / "absent.yaml")]).exit_code == 2


def test_functional_command(tmp_path):
    output = tmp_path / "functional"
    result = runner.invoke(
        app,
        ["functional", "--graph", "path", "--size", "6", "--budget", "2", "--export-field", "--output", str(output)],
    )

    assert result.exit_code == 0, result.output
    assert {"functional.csv", "functional.json", "functional_field.csv"} <= set(os.listdir(output))


def test_functional_rejects_unknown_kind(tmp_path):
    result = runner.invoke(app, ["functional", "--kind", "BAD", "--output", str(tmp_path)])

    assert result.exit_code == 2


def test_scenario_command(tmp_path):
    result = runner.invoke(app, ["scenario", "--name", "path", "--size", "6", "--output", str(tmp_path)])

    assert result.exit_code == 0, result.output
    assert (tmp_path / "scenario_path.json").exists()
    assert (tmp_path / "scenario_path_summary.json").exists()


def test_scenario_unknown_name(tmp_path):
    assert runner.invoke(app, ["scenario", "--name", "torus", "--output", str(tmp_path)]).exit_code == 2


def test_riesz_command(tmp_path):
    result = runner.invoke(
        app, ["riesz", "--graph", "grid", "--size", "5", "--budget", "2", "--output", str(tmp_path)]
    )

    assert result.exit_code == 0, result.output
    assert {"riesz.csv", "riesz.json", "inequalities.csv", "inequalities.json"} <= set(os.listdir(tmp_path))


def test_rbound_command(tmp_path):
    result = runner.invoke(
        app,
        ["rbound", "--sizes", "4,5", "--budget", "3", "--k-max", "2", "--format", "csv", "--output", str(tmp_path)],
    )

    assert result.exit_code == 0, result.output
    with open(tmp_path / "rbound.csv", encoding="utf-8") as file:
        assert len(file.read().strip().splitlines()) == 3
    assert not (tmp_path / "rbound.json").exists()


@pytest.mark.parametrize("sizes", ["4,x", ","])
def test_rbound_rejects_bad_sizes(sizes, tmp_path):
    assert runner.invoke(app, ["rbound", "--sizes", sizes, "--output", str(tmp_path)]).exit_code == 2


def test_unknown_log_level(tmp_path):
    result = runner.invoke(app, ["--log-level", "LOUD", "scenario", "--output", str(tmp_path)])

    assert result.exit_code == 2


def test_version():
    result = runner.invoke(app, ["--version"])

    assert result.exit_code == 0
    assert __version__ in result.output


def test_unknown_suite(tmp_path):
    assert runner.invoke(app, ["verify", "--suite", "nope", "--output", str(tmp_path)]).exit_code == 2


@pytest.mark.slow
def test_quick_suite(tmp_path):
    result = runner.invoke(app, ["verify", "--suite", "quick", "--workers", "2", "--output", str(tmp_path)])

    assert result.exit_code == 0, result.output
    assert {"verify_quick.csv", "verify_quick.json"} <= set(os.listdir(tmp_path))
