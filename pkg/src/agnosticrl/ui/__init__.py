"""Rich terminal output"""

from .display import (
    console,
    error_panel,
    format_command_help,
    info_panel,
    mapping_table,
    results_table,
    show_panel,
    success_panel,
    warning_panel,
)

__all__ = [
    "console",
    "error_panel",
    "format_command_help",
    "info_panel",
    "mapping_table",
    "results_table",
    "show_panel",
    "success_panel",
    "warning_panel",
]
