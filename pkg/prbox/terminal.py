from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from rich.console import Console
from rich.progress import BarColumn
from rich.progress import Progress
from rich.progress import TaskProgressColumn
from rich.progress import TextColumn
from rich.progress import TimeElapsedColumn
from rich.style import Style
from rich.table import Table


@dataclass(frozen=True)
class Claim:
    """One checked statement, printed as a row of the claims table."""

    name: str
    passed: bool
    detail: str = ""


class Terminal:
    """Provides styled terminal output.

    Args:
        show_progress_bar:
            Enables progress bar.
        total:
            The number of jobs to run in total.
        description:
            Label shown next to the bar.
        console:
            Console to print to; a new one writing to stdout by default.
    """

    def __init__(
        self,
        show_progress_bar: bool,
        total: int,
        description: str = "Solving...",
        console: Console | None = None,
    ) -> None:
        self.console = console or Console()
        self._progbar = Progress(
            TextColumn("[progress.description]{task.description}"),
            BarColumn(complete_style=Style(color="light_coral")),
            TaskProgressColumn(),
            TimeElapsedColumn(),
            console=self.console,
            transient=True,
        )

        self._task = self._progbar.add_task(f"[blue]{description}[/blue]", total=total)
        if show_progress_bar:
            self._progbar.start()

    def update_progress_bar(self, *_: object) -> None:
        """Advance progress bar by one job; accepts and ignores job callback arguments."""
        self._progbar.advance(self._task)

    def close_progress_bar(self) -> None:
        """Closes progress bar."""
        self._progbar.stop()

    def print_claims(self, title: str, claims: Sequence[Claim]) -> None:
        table = Table(title=title)
        table.add_column("claim")
        table.add_column("result")
        table.add_column("detail")
        for claim in claims:
            verdict = "[green]PASS[/green]" if claim.passed else "[red]FAIL[/red]"
            table.add_row(claim.name, verdict, claim.detail)
        self.console.print(table)
