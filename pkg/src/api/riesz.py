from typing import List
from typing import Optional

import typer

from src.api.common import OutputFormat
from src.api.common import handle_errors
from src.api.common import print_table
from src.dependencies.basic_dependencies import get_riesz_service
from src.models.models import GammaChannel
from src.models.models import OperatorBundle
from src.models.models import RieszKind
from src.services.battery import named_scenario
from src.services.services import RieszService

riesz_app: typer.Typer = typer.Typer(help="Riesz transforms and related inequalities")


@riesz_app.callback(invoke_without_command=True)
def estimate_riesz(
    kind: List[RieszKind] = typer.Option(
        [RieszKind.FULL, RieszKind.LOCAL, RieszKind.INFINITY], "--kind", help="Repeatable"
    ),
    graph: str = typer.Option("grid", "--graph"),
    size: Optional[int] = typer.Option(None, "--size"),
    p: float = typer.Option(2.0, "--p"),
    budget: int = typer.Option(8, "--budget", min=1),
    seed: int = typer.Option(0, "--seed", min=0),
    channel: GammaChannel = typer.Option(GammaChannel.BOTH, "--channel"),
    output: str = typer.Option("reports", "--output"),
    output_format: OutputFormat = typer.Option(OutputFormat.BOTH, "--format"),
    cache_dir: Optional[str] = typer.Option(None, "--cache-dir"),
) -> None:
    """
    Обработчик, отвечающий за эмпирические нормы преобразований Рисса, неравенство
    треугольника для их разложения и мультипликативное неравенство
    """

    with handle_errors():
        bundle: OperatorBundle = named_scenario(name=graph, size=size)
        service: RieszService = get_riesz_service(output_dir=output, cache_dir=cache_dir)
        reports, inequalities = service.estimate(
            bundle=bundle,
            kinds=kind,
            p=p,
            budget=budget,
            seed=seed,
            channel=channel,
            output_format=output_format.value,
        )

    print_table(
        title=f"Riesz transforms on {bundle.graph.label}, p={p:g}",
        columns=("kind", "norm", "exact p=2", "kernel dim"),
        rows=[(r.kind, r.empirical_norm, r.exact_p2_norm, r.kernel_dim) for r in reports],
    )
    print_table(
        title="inequalities",
        columns=("name", "max value", "evaluated", "skipped"),
        rows=[(i.name, i.max_value, i.probes_evaluated, i.probes_skipped) for i in inequalities],
    )
