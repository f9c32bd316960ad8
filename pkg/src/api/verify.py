import typer

from src.api.common import EXIT_VIOLATION
from src.api.common import OutputFormat
from src.api.common import handle_errors
from src.api.common import print_table
from src.dependencies.basic_dependencies import get_verify_service
from src.schemas.schemas import SuiteReport
from src.services.services import VerifyService

verify_app: typer.Typer = typer.Typer(help="Named checks with pass, observe or violation verdicts")


@verify_app.callback(invoke_without_command=True)
def run_checks(
    suite: str = typer.Option("default", "--suite", help="default or quick"),
    seed: int = typer.Option(0, "--seed", min=0),
    workers: int = typer.Option(1, "--workers", min=1),
    output: str = typer.Option("reports", "--output"),
    output_format: OutputFormat = typer.Option(OutputFormat.BOTH, "--format"),
) -> None:
    """
    Обработчик, отвечающий за запуск набора проверок

    В случае, если хотя бы одно точное утверждение нарушено, команда завершается с кодом 1
    """

    with handle_errors():
        service: VerifyService = get_verify_service(output_dir=output)
        report: SuiteReport = service.run(
            suite=suite, seed=seed, workers=workers, output_format=output_format.value
        )

    print_table(
        title=f"suite {report.suite}, seed {report.seed}",
        columns=("check", "verdict", "exact", "notes"),
        rows=[
            (result.check_id, result.verdict, result.exact, "; ".join(result.notes))
            for result in report.results
        ],
    )
    if report.has_violation:
        raise typer.Exit(code=EXIT_VIOLATION)
