"""pamplots: offline, deterministic figure generation from the simulation
laboratory's CSV artifacts (growth-rate sweeps, correlation checks and
fluctuation-condition reports)."""

from .csvio import CsvTable, SchemaError, read_table, read_tables
from .figures import FIGURE_KINDS, PlotSpec, build_figure, render

__version__ = "0.1.0"

__all__ = [
    "CsvTable", "SchemaError", "read_table", "read_tables",
    "FIGURE_KINDS", "PlotSpec", "build_figure", "render",
]
