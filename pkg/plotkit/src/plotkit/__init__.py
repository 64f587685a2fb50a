"""Figure rendering for line-spectrum benchmark tables."""

from .figures import (
    FIGURE_KINDS,
    FigureBundle,
    PlotJob,
    SchemaError,
    build_figure,
    render,
)

__version__ = "0.1.0"
