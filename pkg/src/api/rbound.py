from typing import List
from typing import Optional

import typer

from src.api.common import OutputFormat
from src.api.common import handle_errors
from src.api.common import parse_sizes
from src.api.common import print_table
from src.dependencies.basic_dependencies import get_rbound_service
from src.models.models import GammaChannel
from src.schemas.schemas import Formulation
from src.schemas.schemas import RBoundEstimate
from src.services.services import RBoundService

rbound_app: typer.Typer = typer.Typer(help="R-boundedness constants of operator families")


@rbound_app.callback(invoke_without_command=True)
def estimate_rbound(
    family: str = typer.Option(
        "heat-gradient", "--family", help="identity, heat-gradient, resolvent, local or infinity"
    ),
    p: float = typer.Option(2.0, "--p"),
    sizes: str = typer.Option("8,16,32", "--sizes", help="Comma-separated scenario sizes"),
    scenario: str = typer.Option("grid", "--graph", help="Named scenario"),
    budget: int = typer.Option(10, "--budget", min=1),
    k_max: int = typer.Option(4, "--k-max", min=1),
    seed: int = typer.Option(0, "--seed", min=0),
    formulation: Formulation = typer.Option(Formulation.SQUARE_FUNCTION, "--formulation"),
    channel: GammaChannel = typer.Option(GammaChannel.BOTH, "--channel"),
    delta_prime: float = typer.Option(1.0, "--delta-prime"),
    output: str = typer.Option("reports", "--output"),
    output_format: OutputFormat = typer.Option(OutputFormat.BOTH, "--format"),
    cache_dir: Optional[str] = typer.Option(None, "--cache-dir"),
) -> None:
    """
    Обработчик, отвечающий за таблицу констант R-ограниченности семейства по ряду
    размеров сценария
    """

    with handle_errors():
        service: RBoundService = get_rbound_service(output_dir=output, cache_dir=cache_dir)
        estimates: List[RBoundEstimate] = service.estimate(
            family_name=family,
            scenario=scenario,
            sizes=parse_sizes(sizes),
            p=p,
            budget=budget,
            k_max=k_max,
            seed=seed,
            formulation=formulation,
            channel=channel,
            delta_prime=delta_prime,
            output_format=output_format.value,
        )

    print_table(
        title=f"{family} at p={p:g}",
        columns=("family", "constant", "mean", "exact p=2"),
        rows=[
            (estimate.family, estimate.empirical_constant, estimate.mean_ratio, estimate.exact_p2_bound)
            for estimate in estimates
        ],
    )
