"""Display utilities for agnostic-rl terminal output."""
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

console = Console()


def format_command_help(commands: List[Tuple[str, str]], min_spacing: int = 4) -> str:
    """Format command help text with aligned descriptions.

    Args:
        commands: List of (command, description) tuples
        min_spacing: Minimum spaces between command and description

    Returns:
        Formatted string with aligned descriptions
    """
    if not commands:
        return ""
    width = max(len(cmd) for cmd, _ in commands)
    return "\n".join(f"{cmd}{' ' * (width - len(cmd) + min_spacing)}{desc}" for cmd, desc in commands)


def show_panel(
    content: str,
    *,
    title: Optional[str] = None,
    style: str = "blue",
    padding: Tuple[int, int] = (1, 3),
    width: int = 80,
) -> None:
    """Display a consistently styled panel.

    Args:
        content: The main text content to display
        title: Optional title
        style: Border style color (default: blue)
        padding: Tuple of (vertical, horizontal) padding
        width: Panel width (default: 80)
    """
    console.print(Panel(content, title=title, border_style=style, width=width, padding=padding))


def success_panel(content: str, title: str = "✨  Success") -> None:
    """Show a success message in a green panel."""
    show_panel(content, title=title, style="green")


def error_panel(content: str, title: str = "❌  Error") -> None:
    """Show an error message in a red panel."""
    show_panel(content, title=title, style="red")


def info_panel(content: str, title: str = "ℹ️  Info") -> None:
    """Show an info message in a blue panel."""
    show_panel(content, title=title, style="blue")


def warning_panel(content: str, title: str = "⚠️  Warning") -> None:
    """Show a warning message in a yellow panel."""
    show_panel(content, title=title, style="yellow")


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def results_table(rows: Iterable[Dict[str, Any]], columns: Sequence[str], title: Optional[str] = None,
                  limit: int = 50) -> None:
    """Print records as a table, truncated to the first ``limit`` rows"""
    rows = list(rows)
    table = Table(title=title, header_style="bold blue")
    for column in columns:
        table.add_column(column, justify="right")
    for row in rows[:limit]:
        table.add_row(*(_cell(row.get(c)) for c in columns))
    console.print(table)
    if len(rows) > limit:
        console.print(f"[dim]... {len(rows) - limit} more rows[/dim]")


def mapping_table(values: Dict[str, Any], title: Optional[str] = None) -> None:
    """Print a key/value mapping as a two-column table"""
    table = Table(title=title, show_header=False)
    table.add_column("key", style="bold")
    table.add_column("value", justify="right")
    for key, value in values.items():
        table.add_row(key, _cell(value))
    console.print(table)
