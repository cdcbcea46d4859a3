"""Every color, size and rc setting in one place.

Figures are meant to be byte-reproducible: same inputs, same bytes. That
rules out anything time- or environment-dependent, so the Agg backend is
forced, fonts are pinned to matplotlib's bundled DejaVu, and the SVG hash
salt is fixed (matplotlib otherwise salts element ids with a random
value).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

PRIMAL_COLOR = "#6a3d9a"
ALTERNATIVE_COLOR = "#e6a400"
MATERIAL_CMAP = "Greys"
HIT_MARKER = "o"
TARGET_RING_COLOR = "#b22222"

METHOD_COLORS = {
    "numeric": "#1f77b4",
    "score": "#d62728",
    "score_baseline": "#2ca02c",
    "stochad": "#9467bd",
    "smooth_only": "#7f7f7f",
}
FALLBACK_COLOR = "#444444"

MEAN_LINE = {"linestyle": "--", "linewidth": 1.4, "color": "#222222"}
BAND_ALPHA = 0.25

FIGSIZE_SQUARE = (6.0, 6.0)
FIGSIZE_WIDE = (12.0, 4.0)
FIGSIZE_PANEL = (6.0, 4.0)
DPI = 150

RC = {
    "figure.dpi": DPI,
    "savefig.dpi": DPI,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "plotviz",
    "svg.fonttype": "path",
}


def method_color(method: str) -> str:
    return METHOD_COLORS.get(method, FALLBACK_COLOR)


def apply() -> None:
    matplotlib.rcParams.update(RC)
