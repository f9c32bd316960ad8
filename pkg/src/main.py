import logging
from typing import Any
from typing import List
from typing import Optional

import typer
import yaml
from rich.logging import RichHandler

from src import __version__
from src.api.common import EXIT_USAGE
from src.api.common import error_console
from src.api.common import handle_errors
from src.api.common import print_table
from src.api.functional import functional_app
from src.api.rbound import rbound_app
from src.api.riesz import riesz_app
from src.api.scenario import scenario_app
from src.api.verify import verify_app
from src.dependencies.basic_dependencies import get_experiment_service
from src.schemas.schemas import ExperimentConfig
from src.schemas.schemas import SummaryRow
from src.services.services import ExperimentService

app: typer.Typer = typer.Typer(
    help="Numerical laboratory for square functionals of Schrödinger operators on weighted graphs",
    no_args_is_help=True,
)

app.add_typer(functional_app, name="functional")
app.add_typer(rbound_app, name="rbound")
app.add_typer(riesz_app, name="riesz")
app.add_typer(verify_app, name="verify")
app.add_typer(scenario_app, name="scenario")


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level.upper(),
        format="[%(name)s] %(message)s",
        handlers=[RichHandler(console=error_console, show_time=False)],
        force=True,
    )


def version_callback(value: bool) -> None:
    if value:
        typer.echo(__version__)
        raise typer.Exit()


@app.callback()
def main(
    log_level: str = typer.Option("WARNING", "--log-level", help="DEBUG, INFO, WARNING or ERROR"),
    version: Optional[bool] = typer.Option(
        None, "--version", callback=version_callback, is_eager=True
    ),
) -> None:
    if log_level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR"):
        error_console.print(f"[red]unknown log level[/red]: {log_level}")
        raise typer.Exit(code=EXIT_USAGE)
    configure_logging(level=log_level)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as file:
            document: Any = yaml.safe_load(file)
    except (OSError, yaml.YAMLError) as exception:
        error_console.print(f"[red]cannot read config[/red]: {exception}")
        raise typer.Exit(code=EXIT_USAGE)
    return ExperimentConfig.model_validate(document)


@app.command("run")
def run_config(
    config_path: str = typer.Argument(..., metavar="CONFIG", help="YAML experiment config"),
    cache_dir: Optional[str] = typer.Option(None, "--cache-dir"),
) -> None:
    """Обработчик, отвечающий за выполнение YAML-конфигурации эксперимента"""

    with handle_errors():
        config: ExperimentConfig = load_config(path=config_path)
        service: ExperimentService = get_experiment_service(
            output_dir=config.output.directory, cache_dir=cache_dir
        )
        rows: List[SummaryRow] = service.run(config=config)

    print_table(
        title=f"scenario {config.scenario}",
        columns=("item", "p", "value", "status", "detail"),
        rows=[(row.item, row.p, row.value, row.status, row.detail) for row in rows],
    )


if __name__ == "__main__":
    app()
