"""Figures from ckdv run directories; consumes output files only."""

from .figures import (
    KINDS,
    FigureRequest,
    plot_bound_check,
    plot_invariant_drift,
    plot_stability,
    plot_waterfall,
    render,
)
from .io import ContractError

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "ContractError",
    "FigureRequest",
    "plot_bound_check",
    "plot_invariant_drift",
    "plot_stability",
    "plot_waterfall",
    "render",
]
