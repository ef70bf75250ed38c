"""Figure regeneration for nonlinear-spin experiment CSVs."""

__version__ = "0.1.0"

from .render import FigureSpec, render
