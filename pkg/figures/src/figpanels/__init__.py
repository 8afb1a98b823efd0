"""Multi-panel figure rendering for simulation CSV outputs."""

from .render import DataError, RenderResult, render
from .spec import FigureSpec, Panel, Series, SpecError, load_spec, parse_spec

__version__ = "0.1.0"
