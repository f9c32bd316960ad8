import logging
from contextlib import contextmanager
from enum import Enum
from typing import Any
from typing import Iterator
from typing import List
from typing import Sequence

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from src.errors import InvalidArgumentError
from src.errors import LabError
from src.errors import ResourceLimitError
from src.errors import UnsupportedError

logger = logging.getLogger(__name__)

EXIT_OK: int = 0
EXIT_VIOLATION: int = 1
EXIT_USAGE: int = 2

console: Console = Console()
error_console: Console = Console(stderr=True)


class OutputFormat(str, Enum):
    CSV = "csv"
    STRUCTURED = "structured"
    BOTH = "both"


def validation_message(exception: ValidationError) -> str:
    """Каждая ошибка валидации с путём поля, например graph.size"""

    return "; ".join(
        f"{'.'.join(str(part) for part in error['loc']) or '<root>'}: {error['msg']}"
        for error in exception.errors()
    )


@contextmanager
def handle_errors() -> Iterator[None]:
    """
    Сопоставляет исключения сервисов кодам выхода: ошибки валидации, недопустимые
    аргументы, неподдерживаемые операции и превышение лимитов дают код 2
    """

    try:
        yield
    except ValidationError as exception:
        error_console.print(f"[red]validation error[/red]: {validation_message(exception)}")
        raise typer.Exit(code=EXIT_USAGE)
    except (InvalidArgumentError, UnsupportedError, ResourceLimitError) as exception:
        error_console.print(f"[red]{type(exception).__name__}[/red]: {exception}")
        raise typer.Exit(code=EXIT_USAGE)
    except LabError as exception:
        logger.error("numeric failure: %s", exception)
        error_console.print(f"[red]{type(exception).__name__}[/red]: {exception}")
        raise typer.Exit(code=EXIT_USAGE)


def parse_sizes(sizes: str) -> List[int]:
    try:
        parsed: List[int] = [int(part) for part in sizes.split(",") if part.strip()]
    except ValueError:
        raise InvalidArgumentError(f"sizes must be a comma-separated list of integers, got {sizes!r}")
    if not parsed:
        raise InvalidArgumentError("sizes must be nonempty")
    return parsed


def _format(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, Enum):
        return str(value.value)
    if value is None:
        return "-"
    return str(value)


def print_table(title: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    table: Table = Table(title=title)
    for column in columns:
        table.add_column(column)
    for row in rows:
        table.add_row(*(_format(value) for value in row))
    console.print(table)
