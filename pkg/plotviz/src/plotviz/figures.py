"""The four figure kinds and the render entry point.

``render`` is a pure function of the input files: fixed style constants,
no timestamps, pinned SVG hash salt, so rendering the same spec twice
produces identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from matplotlib import pyplot as plt
from matplotlib.figure import Figure

from . import style
from .tables import (
    GRADSTATS,
    OPT_TRACE,
    SCAN_GRADS,
    SCAN_LOSS,
    read_event,
    read_table,
)

__all__ = ["FigureKind", "FigureSpec", "draw_figure", "render"]


class FigureKind(str, Enum):
    EVENT_DISPLAY = "event_display"
    SCAN_SUMMARY = "scan_summary"
    GRADSTATS_BOX = "gradstats_box"
    OPTIMIZATION_CURVES = "optimization_curves"

    @classmethod
    def parse(cls, text: str) -> "FigureKind":
        try:
            return cls(text)
        except ValueError:
            raise ValueError(
                f"unknown figure kind {text!r}; expected one of "
                f"{', '.join(k.value for k in cls)}"
            ) from None


# (minimum, maximum) accepted input-file count per kind; scan_summary takes
# exactly scan_loss.csv, scan_grads.csv, gradstats.csv in that order.
_INPUT_ARITY = {
    FigureKind.EVENT_DISPLAY: (1, 1),
    FigureKind.SCAN_SUMMARY: (3, 3),
    FigureKind.GRADSTATS_BOX: (1, 1),
    FigureKind.OPTIMIZATION_CURVES: (1, None),
}

_OUTPUT_SUFFIXES = (".png", ".svg")


@dataclass(frozen=True)
class FigureSpec:
    kind: FigureKind
    inputs: tuple[Path, ...]
    output: Path

    def __post_init__(self):
        object.__setattr__(self, "kind", FigureKind(self.kind))
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        object.__setattr__(self, "output", Path(self.output))
        lo, hi = _INPUT_ARITY[self.kind]
        n = len(self.inputs)
        if n < lo or (hi is not None and n > hi):
            expected = f"exactly {lo}" if lo == hi else f"at least {lo}"
            raise ValueError(
                f"{self.kind.value} takes {expected} input file(s), got {n}"
            )
        for p in self.inputs:
            if not p.is_file():
                raise ValueError(f"input file does not exist: {p}")
        if self.output.suffix.lower() not in _OUTPUT_SUFFIXES:
            raise ValueError(
                f"output {self.output} must end in one of "
                f"{', '.join(_OUTPUT_SUFFIXES)}"
            )


def _draw_branch(ax, branch: dict, color: str, label: str) -> None:
    for i, track in enumerate(branch["tracks"]):
        pts = np.asarray(track["points"], dtype=float)
        ax.plot(
            pts[:, 0],
            pts[:, 1],
            color=color,
            linewidth=1.1,
            alpha=0.9,
            label=label if i == 0 else None,
        )
    if branch["hits"]:
        ax.scatter(
            [h["x"] for h in branch["hits"]],
            [h["y"] for h in branch["hits"]],
            s=22,
            marker=style.HIT_MARKER,
            facecolors="none",
            edgecolors=color,
            linewidths=1.2,
            zorder=3,
        )


def _draw_event_display(inputs) -> Figure:
    doc = read_event(inputs[0])
    mat = doc["material"]
    fig, ax = plt.subplots(figsize=style.FIGSIZE_SQUARE)
    e = float(mat["extent"])
    ax.imshow(
        np.asarray(mat["values"], dtype=float),
        origin="lower",
        extent=(-e, e, -e, e),
        cmap=style.MATERIAL_CMAP,
        vmin=0.0,
        vmax=0.5,
        interpolation="nearest",
    )
    _draw_branch(ax, doc["primal"], style.PRIMAL_COLOR, "primal")
    alt = doc["alternative"]
    if alt is not None:
        _draw_branch(
            ax,
            alt,
            style.ALTERNATIVE_COLOR,
            f"alternative (flip at step {alt['divergence_step']})",
        )
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(f"{doc['mode']}, theta = {doc['theta']:g}")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    return fig


def _method_order(rows) -> list[str]:
    seen: list[str] = []
    for row in rows:
        if row["method"] not in seen:
            seen.append(row["method"])
    return seen


def _draw_boxes(ax, rows) -> None:
    """One box per row, quartiles from the file, dashed line at the mean."""
    stats = []
    for row in rows:
        label = row["method"]
        if row.get("_label_mode"):
            label = f"{row['mode']}\n{row['method']}"
        stats.append(
            {
                "label": label,
                "med": row["q50"],
                "q1": row["q25"],
                "q3": row["q75"],
                "whislo": row["q25"],
                "whishi": row["q75"],
                "mean": row["mean"],
                "fliers": [],
            }
        )
    artists = ax.bxp(
        stats,
        showmeans=True,
        meanline=True,
        showfliers=False,
        meanprops=style.MEAN_LINE,
        patch_artist=True,
    )
    for patch, row in zip(artists["boxes"], rows):
        patch.set_facecolor(style.method_color(row["method"]))
        patch.set_alpha(0.5)
    ax.set_ylabel("gradient estimate")


def _draw_gradstats_box(inputs) -> Figure:
    rows = read_table(inputs[0], GRADSTATS)
    modes: list[str] = []
    for row in rows:
        if row["mode"] not in modes:
            modes.append(row["mode"])
    fig, axes = plt.subplots(
        1,
        len(modes),
        figsize=(style.FIGSIZE_PANEL[0] * len(modes), style.FIGSIZE_PANEL[1]),
        squeeze=False,
    )
    for ax, mode in zip(axes[0], modes):
        subset = [r for r in rows if r["mode"] == mode]
        _draw_boxes(ax, subset)
        ax.set_title(f"{mode}, theta = {subset[0]['theta']:g}, n = {subset[0]['n']}")
    fig.tight_layout()
    return fig


def _draw_scan_summary(inputs) -> Figure:
    loss_rows = read_table(inputs[0], SCAN_LOSS)
    grad_rows = read_table(inputs[1], SCAN_GRADS)
    box_rows = read_table(inputs[2], GRADSTATS)

    fig, (ax_loss, ax_grad, ax_box) = plt.subplots(1, 3, figsize=style.FIGSIZE_WIDE)

    thetas = [r["theta"] for r in loss_rows]
    means = [r["loss_mean"] for r in loss_rows]
    ax_loss.fill_between(
        thetas,
        [r["q25"] for r in loss_rows],
        [r["q75"] for r in loss_rows],
        alpha=style.BAND_ALPHA,
        color=style.PRIMAL_COLOR,
        linewidth=0,
    )
    ax_loss.plot(thetas, means, color=style.PRIMAL_COLOR, label="mean loss")
    i_min = int(np.argmin(means))
    ax_loss.plot(
        thetas[i_min],
        means[i_min],
        marker="v",
        markersize=8,
        color=style.TARGET_RING_COLOR,
        linestyle="none",
        label="minimum",
    )
    ax_loss.set_xlabel("theta [m]")
    ax_loss.set_ylabel("loss")
    ax_loss.legend()

    for method in _method_order(grad_rows):
        subset = [r for r in grad_rows if r["method"] == method]
        ax_grad.errorbar(
            [r["theta"] for r in subset],
            [r["grad_mean"] for r in subset],
            yerr=[r["grad_std"] for r in subset],
            color=style.method_color(method),
            label=method,
            capsize=2,
            linewidth=1.2,
        )
    ax_grad.plot(
        thetas,
        [r["poly_fit_grad"] for r in loss_rows],
        color="#222222",
        linestyle="--",
        label="loss-fit slope",
    )
    ax_grad.set_xlabel("theta [m]")
    ax_grad.set_ylabel("gradient")
    ax_grad.legend(fontsize=8)

    if len({r["mode"] for r in box_rows}) > 1:
        box_rows = [dict(r, _label_mode=True) for r in box_rows]
    _draw_boxes(ax_box, box_rows)
    fig.tight_layout()
    return fig


def _draw_optimization_curves(inputs) -> Figure:
    fig, ax = plt.subplots(figsize=style.FIGSIZE_PANEL)
    for path in inputs:
        rows = read_table(path, OPT_TRACE)
        steps = sorted({r["step"] for r in rows})
        by_step = {s: [] for s in steps}
        for r in rows:
            by_step[r["step"]].append(r["loss"])
        mean = [float(np.mean(by_step[s])) for s in steps]
        lo = [float(np.percentile(by_step[s], 25)) for s in steps]
        hi = [float(np.percentile(by_step[s], 75)) for s in steps]
        name = Path(path).stem
        name = name[4:] if name.startswith("opt_") else name
        color = style.method_color(name)
        ax.fill_between(steps, lo, hi, alpha=style.BAND_ALPHA, color=color, linewidth=0)
        ax.plot(steps, mean, color=color, label=name)
    ax.set_xlabel("step")
    ax.set_ylabel("loss")
    ax.legend()
    fig.tight_layout()
    return fig


_DRAWERS = {
    FigureKind.EVENT_DISPLAY: _draw_event_display,
    FigureKind.SCAN_SUMMARY: _draw_scan_summary,
    FigureKind.GRADSTATS_BOX: _draw_gradstats_box,
    FigureKind.OPTIMIZATION_CURVES: _draw_optimization_curves,
}


def draw_figure(kind: FigureKind, inputs) -> Figure:
    style.apply()
    return _DRAWERS[FigureKind(kind)](tuple(Path(p) for p in inputs))


def render(spec: FigureSpec) -> Path:
    fig = draw_figure(spec.kind, spec.inputs)
    try:
        metadata = {"Date": None} if spec.output.suffix.lower() == ".svg" else None
        fig.savefig(spec.output, metadata=metadata)
    finally:
        plt.close(fig)
    return spec.output
