"""Post-processing figures for acdg run directories."""

from .render import FigureRequest, render

__version__ = "0.1.0"
