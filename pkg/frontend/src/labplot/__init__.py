"""Figure rendering for lab experiment output directories.

No numerical logic lives here: every figure is drawn straight from the
CSV/JSON artifacts an experiment run leaves behind.
"""

from .render import FIGURE_KINDS, FigureSpec, render, render_to_file

__all__ = ["FigureSpec", "FIGURE_KINDS", "render", "render_to_file"]

__version__ = "0.1.0"
