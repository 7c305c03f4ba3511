"""Report figures, rendered without any interactive backend.

Figures are built on explicit Figure objects (no pyplot state) and
written as SVG.  A figure group renders entirely in memory before any
file is touched, so a failure partway leaves no half-written set on
disk.  Hash salts and date metadata are pinned to keep repeated runs
byte-comparable.
"""

from __future__ import annotations

import io
import os

import matplotlib
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "seasurrogate"

from matplotlib.figure import Figure  # noqa: E402

from .errors import ValidationError  # noqa: E402

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def render_svg(fig: Figure) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None}, bbox_inches="tight")
    return buf.getvalue()


def save_group(figures: dict[str, Figure]) -> list[str]:
    """Render every figure first, then write; all-or-nothing."""
    rendered = {os.fspath(path): render_svg(fig) for path, fig in figures.items()}
    for path, payload in rendered.items():
        with open(path, "wb") as fh:
            fh.write(payload)
    return sorted(rendered)


def save_figure(path: str | os.PathLike, fig: Figure) -> None:
    save_group({os.fspath(path): fig})


def _model_color(index: int) -> str:
    return _COLORS[index % len(_COLORS)]


def make_elevation_preview(times: np.ndarray, samples: np.ndarray,
                           title: str = "elevation record") -> Figure:
    fig = Figure(figsize=(8.0, 3.0))
    ax = fig.add_subplot(111)
    ax.plot(times, samples, lw=0.7, color=_COLORS[0])
    ax.set_xlabel("t [s]")
    ax.set_ylabel("elevation [m]")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    return fig


def make_loss_curves(named_histories: dict[str, list[dict]]) -> Figure:
    fig = Figure(figsize=(7.0, 4.0))
    ax = fig.add_subplot(111)
    low = float("inf")
    for i, (name, rows) in enumerate(sorted(named_histories.items())):
        epochs = [r["epoch"] for r in rows]
        train = [r["train_loss"] for r in rows]
        val = [r["val_loss"] for r in rows]
        low = min([low, *train, *val])
        ax.plot(epochs, train, color=_model_color(i), lw=1.2, label=f"{name} train")
        ax.plot(epochs, val, color=_model_color(i), lw=1.2, ls="--", label=f"{name} val")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    # The relative-entropy objective goes negative, where a log axis
    # would silently drop points.
    if low > 0.0:
        ax.set_yscale("log")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    return fig


def make_timeseries_overlay(
    times: np.ndarray,
    truth: np.ndarray,
    predictions: dict[str, np.ndarray],
    ylabel: str,
    t_span: tuple[float, float] | None = None,
) -> Figure:
    """Truth and model predictions for one channel on one time axis."""
    fig = Figure(figsize=(9.0, 3.2))
    ax = fig.add_subplot(111)
    ax.plot(times, truth, color="black", lw=1.1, label="reference")
    for i, (name, series) in enumerate(sorted(predictions.items())):
        ax.plot(times, series, color=_model_color(i), lw=0.9, alpha=0.85, label=name)
    if t_span is not None:
        ax.set_xlim(*t_span)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8, ncol=len(predictions) + 1)
    return fig


def make_pdf_overlay(
    ref: "PdfEstimate",
    model_pdfs: dict[str, "PdfEstimate"],
    gaussian: "PdfEstimate | None" = None,
    xlabel: str = "response",
    log_y: bool = True,
) -> Figure:
    fig = Figure(figsize=(6.5, 4.2))
    ax = fig.add_subplot(111)
    ax.plot(ref.grid, ref.density, color="black", lw=1.4, label="reference")
    if gaussian is not None:
        ax.plot(gaussian.grid, gaussian.density, color="gray", lw=1.0, ls=":",
                label="gaussian fit")
    for i, (name, pdf) in enumerate(sorted(model_pdfs.items())):
        ax.plot(pdf.grid, pdf.density, color=_model_color(i), lw=1.1, label=name)
    if log_y:
        ax.set_yscale("log")
        floor = max(ref.density.max() * 1e-6, 1e-12)
        ax.set_ylim(bottom=floor)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("probability density")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    return fig


def make_rse_bars(summary_rows: list[dict], metric: str = "rse_mean") -> Figure:
    """Grouped bars: one cluster per (state, channel), one bar per model."""
    if not summary_rows:
        raise ValidationError("no summary rows to plot")
    models = sorted({r["model"] for r in summary_rows})
    groups = sorted({(r["state"], r["channel"]) for r in summary_rows})
    lookup = {(r["model"], r["state"], r["channel"]): r for r in summary_rows}
    width = 0.8 / len(models)
    fig = Figure(figsize=(max(7.0, 1.1 * len(groups)), 4.0))
    ax = fig.add_subplot(111)
    xs = np.arange(len(groups))
    for i, model in enumerate(models):
        heights, errs = [], []
        for g in groups:
            row = lookup.get((model, *g))
            heights.append(row[metric] if row else np.nan)
            errs.append(row.get(metric.replace("_mean", "_std"), 0.0) if row else 0.0)
        ax.bar(xs + (i - (len(models) - 1) / 2) * width, heights, width,
               yerr=errs, capsize=2, color=_model_color(i), label=model)
    ax.set_xticks(xs)
    ax.set_xticklabels([f"{s}\n{c}" for s, c in groups], fontsize=8)
    ax.set_ylabel(metric.replace("_mean", ""))
    ax.grid(alpha=0.3, axis="y")
    ax.legend(fontsize=8)
    return fig


def make_stft_heatmap(
    times: np.ndarray,
    freqs: np.ndarray,
    magnitude: np.ndarray,
    intervals: list[tuple[float, float]] | None = None,
    title: str = "",
    f_max: float | None = None,
) -> Figure:
    """Short-time spectrum heatmap with optional flagged time intervals."""
    fig = Figure(figsize=(8.0, 4.0))
    ax = fig.add_subplot(111)
    mesh = ax.pcolormesh(times, freqs, magnitude, shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="|amplitude|")
    if intervals:
        for t0, t1 in intervals:
            ax.axvspan(t0, t1, color="red", alpha=0.18, lw=0)
    if f_max is not None:
        ax.set_ylim(0, f_max)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("frequency [Hz]")
    if title:
        ax.set_title(title)
    return fig


def make_phase_portrait(points: np.ndarray, xlabel: str = "roll [deg]",
                        ylabel: str = "pitch [deg]") -> Figure:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError(f"phase portrait needs (n, 2) points, got {pts.shape}")
    fig = Figure(figsize=(5.0, 5.0))
    ax = fig.add_subplot(111)
    ax.plot(pts[:, 0], pts[:, 1], lw=0.4, color=_COLORS[0], alpha=0.7)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    ax.set_title("joint trajectory")
    return fig


def save_rse_bars(path: str | os.PathLike, summary_rows: list[dict]) -> None:
    save_figure(path, make_rse_bars(summary_rows))
