"""Accuracy and distribution-fidelity metrics.

Pointwise accuracy uses the relative squared error

    RSE = sum((y - yhat)^2) / sum((y - mean(y))^2),

so 1.0 is the score of the constant mean predictor and 0.0 is perfect.
Distribution fidelity compares kernel density estimates of pooled
response records via the Kullback-Leibler divergence on a common grid,
with special attention to the tail region of the roll channel.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.stats import gaussian_kde

from .dataset import CHANNELS, Realization
from .errors import ValidationError
from .lstm import predict_series
from .rng import stream

#: Probability floor applied before KL integration.
PDF_FLOOR = 1e-12
#: Default exceedance thresholds, in multiples of the record sigma.
EXC_THRESHOLDS = (1.0, 1.5, 2.0, 2.5, 3.0)


# ---------------------------------------------------------------- pointwise

def rse(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape:
        raise ValidationError(f"shape mismatch {y_true.shape} vs {y_pred.shape}")
    denom = float(np.sum((y_true - y_true.mean()) ** 2))
    if denom <= 0:
        raise ValidationError("reference series is constant; relative error undefined")
    return float(np.sum((y_true - y_pred) ** 2) / denom)


@dataclass(frozen=True)
class SeriesMetrics:
    rse: float
    mse: float
    mae: float
    max_abs_err: float
    n: int

    def to_dict(self) -> dict:
        return {
            "rse": self.rse, "mse": self.mse, "mae": self.mae,
            "max_abs_err": self.max_abs_err, "n": self.n,
        }


def aligned_metrics(y_true: np.ndarray, y_pred: np.ndarray) -> SeriesMetrics:
    """Metrics over the overlap where the prediction is defined.

    Predicted series carry NaN where no causal window exists; those
    positions are excluded.
    """
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape:
        raise ValidationError(f"shape mismatch {y_true.shape} vs {y_pred.shape}")
    mask = np.isfinite(y_pred)
    if not np.any(mask):
        raise ValidationError("prediction has no finite samples")
    t, p = y_true[mask], y_pred[mask]
    err = p - t
    return SeriesMetrics(
        rse=rse(t, p),
        mse=float(np.mean(err**2)),
        mae=float(np.mean(np.abs(err))),
        max_abs_err=float(np.max(np.abs(err))),
        n=int(t.size),
    )


# ------------------------------------------------------------ distributions

@dataclass(frozen=True)
class PdfEstimate:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float  # absolute kernel bandwidth; 0 for histograms

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if g.ndim != 1 or g.shape != d.shape or g.size < 4:
            raise ValidationError("pdf estimate needs matching 1-d grid and density")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "density", d)

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))


def estimate_pdf(
    series: np.ndarray,
    method: str = "kde",
    bandwidth: float | None = None,
    bins: int = 64,
    grid_size: int = 512,
) -> PdfEstimate:
    """Density estimate of a response record.

    ``kde`` uses a Gaussian kernel with Silverman bandwidth (optionally
    overridden by ``bandwidth``, an absolute value); the grid pads six
    bandwidths past the sample extremes and the result is renormalized
    to unit integral.  ``histogram`` bins the data and reports densities
    at bin centers.
    """
    x = np.asarray(series, dtype=float).ravel()
    x = x[np.isfinite(x)]
    if x.size < 8:
        raise ValidationError(f"need at least 8 samples for a density estimate, got {x.size}")
    sigma = float(np.std(x))
    if sigma <= 0:
        raise ValidationError("degenerate (constant) sample; no density estimate")
    if method == "kde":
        if bandwidth is not None:
            if bandwidth <= 0:
                raise ValidationError("bandwidth must be positive")
            kde = gaussian_kde(x, bw_method=bandwidth / sigma)
            bw = float(bandwidth)
        else:
            kde = gaussian_kde(x, bw_method="silverman")
            bw = float(kde.factor * sigma)
        lo, hi = x.min() - 6.0 * bw, x.max() + 6.0 * bw
        grid = np.linspace(lo, hi, grid_size)
        density = kde(grid)
    elif method == "histogram":
        if bins < 4:
            raise ValidationError("need at least 4 bins")
        counts, edges = np.histogram(x, bins=bins, density=True)
        grid = 0.5 * (edges[:-1] + edges[1:])
        density = counts
        bw = 0.0
    else:
        raise ValidationError(f"unknown density method '{method}'")
    area = np.trapezoid(density, grid)
    if area <= 0:
        raise ValidationError("density estimate integrates to zero")
    return PdfEstimate(grid=grid, density=density / area, bandwidth=bw)


def gaussian_pdf(grid: np.ndarray, mu: float, sigma: float) -> PdfEstimate:
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    g = np.asarray(grid, dtype=float)
    d = np.exp(-0.5 * ((g - mu) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    return PdfEstimate(grid=g, density=d / np.trapezoid(d, g), bandwidth=0.0)


def kl_divergence(p: PdfEstimate, q: PdfEstimate, grid_size: int = 2048) -> float:
    """KL(p || q) on the union grid with flooring and renormalization.

    Both densities are linearly interpolated onto a common grid, floored
    at a tiny positive value (so disjoint support costs a large but
    finite penalty), renormalized, and integrated by the trapezoid rule.
    """
    lo = min(p.grid[0], q.grid[0])
    hi = max(p.grid[-1], q.grid[-1])
    grid = np.linspace(lo, hi, grid_size)
    pi = np.maximum(np.interp(grid, p.grid, p.density, left=0.0, right=0.0), PDF_FLOOR)
    qi = np.maximum(np.interp(grid, q.grid, q.density, left=0.0, right=0.0), PDF_FLOOR)
    pi = pi / np.trapezoid(pi, grid)
    qi = qi / np.trapezoid(qi, grid)
    return float(np.trapezoid(pi * np.log(pi / qi), grid))


def tail_kl(p: PdfEstimate, q: PdfEstimate, sigma: float, k: float = 2.0,
            grid_size: int = 2048) -> float:
    """KL between the conditional densities on the tail region |x| > k sigma."""
    if sigma <= 0 or k < 0:
        raise ValidationError("need sigma > 0 and k >= 0")
    lo = min(p.grid[0], q.grid[0])
    hi = max(p.grid[-1], q.grid[-1])
    grid = np.linspace(lo, hi, grid_size)
    mask = np.abs(grid) > k * sigma
    if np.count_nonzero(mask) < 8:
        raise ValidationError("tail region contains too few grid points")
    pi = np.maximum(np.interp(grid, p.grid, p.density, left=0.0, right=0.0), PDF_FLOOR)[mask]
    qi = np.maximum(np.interp(grid, q.grid, q.density, left=0.0, right=0.0), PDF_FLOOR)[mask]
    g = grid[mask]
    # Renormalize within the region: compare conditional tail shapes.
    pi = pi / np.trapezoid(pi, g)
    qi = qi / np.trapezoid(qi, g)
    return float(np.trapezoid(pi * np.log(pi / qi), g))


# ------------------------------------------------------------- tail numbers

def excess_kurtosis(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float).ravel()
    x = x[np.isfinite(x)]
    if x.size < 8:
        raise ValidationError("too few samples for kurtosis")
    c = x - x.mean()
    m2 = np.mean(c**2)
    if m2 <= 0:
        raise ValidationError("degenerate sample")
    return float(np.mean(c**4) / m2**2 - 3.0)


def skewness(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float).ravel()
    x = x[np.isfinite(x)]
    if x.size < 8:
        raise ValidationError("too few samples for skewness")
    c = x - x.mean()
    m2 = np.mean(c**2)
    if m2 <= 0:
        raise ValidationError("degenerate sample")
    return float(np.mean(c**3) / m2**1.5)


def exceedance_table(
    x: np.ndarray,
    thresholds: tuple[float, ...] = EXC_THRESHOLDS,
    sigma: float | None = None,
) -> dict[float, float]:
    """P(|x - mean| > k sigma) for each threshold multiple k.

    ``sigma`` defaults to the record's own standard deviation; pass the
    reference sigma to compare predicted records on a common scale.
    """
    x = np.asarray(x, dtype=float).ravel()
    x = x[np.isfinite(x)]
    if x.size < 8:
        raise ValidationError("too few samples for exceedance rates")
    c = np.abs(x - x.mean())
    if sigma is None:
        sigma = float(np.std(x))
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    return {float(k): float(np.mean(c > k * sigma)) for k in thresholds}


def bootstrap_se(values: np.ndarray, n_boot: int = 2000, seed: int = 0) -> float:
    """Bootstrap standard error of the mean of seed-level statistics."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        raise ValidationError("need at least two values to bootstrap")
    rng = stream(seed, "bootstrap")
    idx = rng.integers(0, v.size, size=(n_boot, v.size))
    return float(np.std(v[idx].mean(axis=1)))


# ------------------------------------------------------------------ reports

def evaluate_checkpoint(
    name: str,
    checkpoint,
    realizations: list[Realization],
    batch: int = 4096,
) -> list[dict]:
    """Per-realization, per-channel metric rows for one trained model."""
    if checkpoint.stencil is None:
        raise ValidationError("checkpoint carries no stencil configuration")
    rows = []
    for r in realizations:
        pred = predict_series(
            checkpoint.params, r, checkpoint.stencil,
            normalization=checkpoint.normalization, batch=batch,
        )
        for c, channel in enumerate(CHANNELS):
            m = aligned_metrics(r.motions[c], pred[c])
            rows.append({
                "model": name, "state": r.label, "seed": r.seed,
                "channel": channel, **m.to_dict(),
            })
    return rows


def summarize_rows(rows: list[dict]) -> list[dict]:
    """Mean and standard deviation over seeds per (model, state, channel)."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["model"], row["state"], row["channel"]), []).append(row)
    out = []
    for (model, state, channel), g in sorted(groups.items()):
        entry = {"model": model, "state": state, "channel": channel, "seeds": len(g)}
        for key in ("rse", "mse", "mae", "max_abs_err"):
            vals = np.array([r[key] for r in g])
            entry[f"{key}_mean"] = float(vals.mean())
            entry[f"{key}_std"] = float(vals.std())
        out.append(entry)
    return out


def pooled_channel(realizations: list[Realization], channel: str) -> np.ndarray:
    c = CHANNELS.index(channel)
    return np.concatenate([r.motions[c] for r in realizations])


def pooled_predictions(checkpoint, realizations: list[Realization],
                       channel: str, batch: int = 4096) -> np.ndarray:
    """Concatenated finite predicted samples for one channel."""
    c = CHANNELS.index(channel)
    parts = []
    for r in realizations:
        pred = predict_series(
            checkpoint.params, r, checkpoint.stencil,
            normalization=checkpoint.normalization, batch=batch,
        )[c]
        parts.append(pred[np.isfinite(pred)])
    return np.concatenate(parts)


def distribution_report(
    named_checkpoints: dict[str, object],
    realizations: list[Realization],
    channel: str = "roll",
) -> list[dict]:
    """Pooled distribution comparison per sea state and model.

    For each state: reference kurtosis and exceedances, then per model
    the same statistics plus KL(model || reference) on kernel density
    estimates and the conditional tail KL beyond two sigma.
    """
    by_label: dict[str, list[Realization]] = {}
    for r in realizations:
        by_label.setdefault(r.label, []).append(r)
    rows = []
    for label in sorted(by_label):
        group = by_label[label]
        ref = pooled_channel(group, channel)
        ref_pdf = estimate_pdf(ref)
        ref_sigma = float(np.std(ref))
        rows.append({
            "state": label, "model": "reference", "channel": channel,
            "sigma": ref_sigma, "kurtosis": excess_kurtosis(ref),
            "kl_to_reference": 0.0, "tail_kl": 0.0,
            **{f"exc_{k:g}s": v for k, v in exceedance_table(ref, sigma=ref_sigma).items()},
        })
        for name, ckpt in named_checkpoints.items():
            pred = pooled_predictions(ckpt, group, channel)
            pdf = estimate_pdf(pred)
            rows.append({
                "state": label, "model": name, "channel": channel,
                "sigma": float(np.std(pred)), "kurtosis": excess_kurtosis(pred),
                "kl_to_reference": kl_divergence(pdf, ref_pdf),
                "tail_kl": tail_kl(pdf, ref_pdf, ref_sigma, k=2.0),
                **{f"exc_{k:g}s": v
                   for k, v in exceedance_table(pred, sigma=ref_sigma).items()},
            })
    return rows


def seed_ensemble_report(
    named_checkpoints: dict[str, object],
    realizations: list[Realization],
    out_dir: str | os.PathLike | None = None,
) -> dict:
    """Full held-out evaluation across models.

    Returns per-seed rows, per-group summaries, and pooled distribution
    rows for the roll channel.  When ``out_dir`` is given, writes
    ``metrics_per_seed.csv``, ``metrics_summary.csv``,
    ``distribution_roll.csv`` and an RSE bar chart there.
    """
    if not named_checkpoints:
        raise ValidationError("no models to evaluate")
    if not realizations:
        raise ValidationError("no realizations to evaluate on")
    rows = []
    for name in sorted(named_checkpoints):
        rows.extend(evaluate_checkpoint(name, named_checkpoints[name], realizations))
    summary = summarize_rows(rows)
    dist = distribution_report(named_checkpoints, realizations)
    report = {"rows": rows, "summary": summary, "distribution": dist}
    if out_dir is not None:
        from . import figures

        out_dir = os.fspath(out_dir)
        os.makedirs(out_dir, exist_ok=True)
        _write_rows_csv(os.path.join(out_dir, "metrics_per_seed.csv"), rows)
        _write_rows_csv(os.path.join(out_dir, "metrics_summary.csv"), summary)
        _write_rows_csv(os.path.join(out_dir, "distribution_roll.csv"), dist)
        figures.save_rse_bars(os.path.join(out_dir, "rse_bars.svg"), summary)
        report["files"] = [
            "metrics_per_seed.csv", "metrics_summary.csv",
            "distribution_roll.csv", "rse_bars.svg",
        ]
    return report


def _write_rows_csv(path: str, rows: list[dict]) -> None:
    import csv

    if not rows:
        raise ValidationError(f"no rows to write to {path}")
    keys = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(keys)
        for row in rows:
            writer.writerow([_cell(row.get(k)) for k in keys])


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)
