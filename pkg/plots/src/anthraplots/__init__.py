"""Figure rendering for filter-run CSVs."""

from .render import (
    ColumnError,
    FigureSpec,
    Panel,
    TimeGridError,
    check_time_grids,
    load_panel,
    render_figure,
)

__all__ = [
    "ColumnError",
    "FigureSpec",
    "Panel",
    "TimeGridError",
    "check_time_grids",
    "load_panel",
    "render_figure",
]

__version__ = "0.1.0"
