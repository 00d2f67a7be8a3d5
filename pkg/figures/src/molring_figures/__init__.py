"""Figure rendering for molring scenario results."""

__version__ = "0.1.0"

from .render import FIGURE_KINDS, FigureJob, RenderError, load_manifest, render

__all__ = ["FIGURE_KINDS", "FigureJob", "RenderError", "load_manifest", "render",
           "__version__"]
