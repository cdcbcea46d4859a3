"""Static figures from branchgrad CSV/JSON outputs."""

from .figures import FigureKind, FigureSpec, draw_figure, render
from .tables import SchemaError

__version__ = "0.1.0"

__all__ = ["FigureKind", "FigureSpec", "SchemaError", "draw_figure", "render", "__version__"]
