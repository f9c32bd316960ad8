from typing import List
from typing import Optional

import typer

from src.api.common import OutputFormat
from src.api.common import handle_errors
from src.api.common import print_table
from src.dependencies.basic_dependencies import get_functional_service
from src.models.models import CombineRule
from src.models.models import FunctionalKind
from src.models.models import FunctionalSpec
from src.models.models import GammaChannel
from src.models.models import OperatorBundle
from src.schemas.schemas import FunctionalConfig
from src.schemas.schemas import FunctionalNormReport
from src.schemas.schemas import MultiplierConfig
from src.services.battery import named_scenario
from src.services.services import FunctionalService
from src.services.services import spec_from_config

functional_app: typer.Typer = typer.Typer(help="Empirical norms of square functionals")


@functional_app.callback(invoke_without_command=True)
def estimate_functional(
    kind: FunctionalKind = typer.Option(FunctionalKind.H, "--kind", help="Functional kind"),
    graph: str = typer.Option("grid", "--graph", help="Named scenario"),
    size: Optional[int] = typer.Option(None, "--size", help="Scenario size"),
    p: List[float] = typer.Option([2.0], "--p", help="Lebesgue exponent, repeatable"),
    budget: int = typer.Option(8, "--budget", min=1),
    seed: int = typer.Option(0, "--seed", min=0),
    channel: GammaChannel = typer.Option(GammaChannel.BOTH, "--channel"),
    combine: CombineRule = typer.Option(CombineRule.SUM, "--combine"),
    multiplier: List[str] = typer.Option(
        ["constant"], "--multiplier", help="Multiplier kind m_k, repeatable"
    ),
    export_field: bool = typer.Option(False, "--export-field", help="Write per-vertex values"),
    output: str = typer.Option("reports", "--output"),
    output_format: OutputFormat = typer.Option(OutputFormat.BOTH, "--format"),
    cache_dir: Optional[str] = typer.Option(None, "--cache-dir"),
) -> None:
    """
    Обработчик, отвечающий за оценку нормы функционала на именованном сценарии.
    Для каждого p выводится наибольшее найденное отношение и, при p = 2, тождество rss
    """

    with handle_errors():
        config: FunctionalConfig = FunctionalConfig(
            kind=kind,
            channel=channel,
            combine=combine,
            multipliers=[MultiplierConfig(kind=name) for name in multiplier],
        )
        spec: FunctionalSpec = spec_from_config(config=config)
        bundle: OperatorBundle = named_scenario(name=graph, size=size)
        service: FunctionalService = get_functional_service(output_dir=output, cache_dir=cache_dir)
        reports: List[FunctionalNormReport] = service.estimate(
            bundle=bundle,
            spec=spec,
            exponents=p,
            budget=budget,
            seed=seed,
            output_format=output_format.value,
            export_field=export_field,
        )

    print_table(
        title=f"{spec.label} on {bundle.graph.label}",
        columns=("p", "constant", "skipped", "identity lhs", "identity rhs"),
        rows=[
            (report.p, report.empirical_constant, report.probes_skipped, report.identity_lhs, report.identity_rhs)
            for report in reports
        ],
    )
