from typing import Any
from typing import Dict
from typing import Optional

import typer

from src.api.common import handle_errors
from src.api.common import print_table
from src.dependencies.basic_dependencies import get_scenario_service
from src.services.services import ScenarioService

scenario_app: typer.Typer = typer.Typer(help="Named graphs and operators")


@scenario_app.callback(invoke_without_command=True)
def build_named_scenario(
    name: str = typer.Option("grid", "--name", help="Scenario name"),
    size: Optional[int] = typer.Option(None, "--size"),
    output: str = typer.Option("reports", "--output"),
    cache_dir: Optional[str] = typer.Option(None, "--cache-dir"),
) -> None:
    """Обработчик, отвечающий за построение сценария и вывод его спектральной сводки"""

    with handle_errors():
        service: ScenarioService = get_scenario_service(output_dir=output, cache_dir=cache_dir)
        summary: Dict[str, Any] = service.build(name=name, size=size)

    print_table(
        title=f"scenario {name}",
        columns=("field", "value"),
        rows=[(key, value) for key, value in summary.items()],
    )
