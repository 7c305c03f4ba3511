"""Paired wave-probe / motion records: on-disk format, splits, stencils.

A realization is one synthetic seakeeping run: probe elevation series plus
heave, pitch and roll sampled on a shared uniform time grid.  Realizations
are stored as plain CSV (columns ``t, probe_0[, probe_1, ...], heave,
pitch, roll``) next to a JSON campaign manifest listing files and the
generating configuration.

Supervised samples pair a causal window of probe history

    x(t) = [p(t), p(t - dt), ..., p(t - K dt)]      (newest row first)

with the instantaneous motion vector y(t) = [heave, pitch, roll].
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .rng import stream

#: Motion channel order used everywhere (CSV columns, model outputs).
CHANNELS = ("heave", "pitch", "roll")
#: Units per channel, for report labelling only.
CHANNEL_UNITS = ("m", "deg", "deg")

#: Maximum tolerated deviation of the time column from a uniform grid [s].
DT_JITTER_TOL = 1e-6


@dataclass(frozen=True)
class Realization:
    """One synthetic run: wave probes plus motions on a shared grid."""

    label: str           # sea-state label, e.g. "SS-3"
    seed: int            # realization seed within the campaign
    dt: float            # sample spacing [s]
    probes: np.ndarray   # (n_probes, L) elevation [m]
    motions: np.ndarray  # (3, L) heave [m], pitch [deg], roll [deg]

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.probes, dtype=float))
        m = np.atleast_2d(np.asarray(self.motions, dtype=float))
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if m.shape[0] != len(CHANNELS):
            raise ValidationError(f"expected {len(CHANNELS)} motion channels, got {m.shape[0]}")
        if p.shape[1] != m.shape[1]:
            raise ValidationError(
                f"probe and motion lengths differ: {p.shape[1]} vs {m.shape[1]}"
            )
        if p.shape[1] < 2:
            raise ValidationError("realization needs at least two samples")
        if not np.all(np.isfinite(p)) or not np.all(np.isfinite(m)):
            raise ValidationError(f"non-finite values in realization {self.name}")
        object.__setattr__(self, "probes", p)
        object.__setattr__(self, "motions", m)

    @property
    def name(self) -> str:
        return f"{self.label}_s{self.seed:03d}"

    @property
    def n_probes(self) -> int:
        return int(self.probes.shape[0])

    @property
    def n_samples(self) -> int:
        return int(self.probes.shape[1])

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt

    def motion(self, channel: str) -> np.ndarray:
        return self.motions[CHANNELS.index(channel)]


def _fmt(x: float) -> str:
    # repr round-trips float64 exactly and keeps reruns byte-identical.
    return repr(float(x))


def write_realization_csv(path: str | os.PathLike, r: Realization) -> None:
    header = ["t"] + [f"probe_{i}" for i in range(r.n_probes)] + list(CHANNELS)
    t = r.times()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k in range(r.n_samples):
            row = [_fmt(t[k])]
            row += [_fmt(v) for v in r.probes[:, k]]
            row += [_fmt(v) for v in r.motions[:, k]]
            writer.writerow(row)


def read_realization_csv(
    path: str | os.PathLike,
    label: str = "",
    seed: int = 0,
    expected_dt: float | None = None,
) -> Realization:
    """Parse a realization CSV, enforcing grid uniformity and shape."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise ValidationError(f"realization file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"empty realization file: {path}") from None
        rows = []
        for i, row in enumerate(reader):
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}: row {i + 2} has {len(row)} fields, expected {len(header)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ValidationError(f"{path}: row {i + 2}: {exc}") from None
    if header[0] != "t":
        raise ValidationError(f"{path}: first column must be 't', got '{header[0]}'")
    for ch in CHANNELS:
        if ch not in header:
            raise ValidationError(f"{path}: missing channel column '{ch}'")
    probe_cols = [i for i, h in enumerate(header) if h.startswith("probe_")]
    if not probe_cols:
        raise ValidationError(f"{path}: no probe columns")
    data = np.asarray(rows, dtype=float)
    if data.shape[0] < 2:
        raise ValidationError(f"{path}: need at least two samples")

    t = data[:, 0]
    dt = (t[-1] - t[0]) / (len(t) - 1)
    if not dt > 0:
        raise ValidationError(f"{path}: time column is not increasing")
    jitter = np.max(np.abs(t - (t[0] + dt * np.arange(len(t)))))
    if jitter > DT_JITTER_TOL:
        raise ValidationError(
            f"{path}: non-uniform time grid (max jitter {jitter:.3e} s exceeds {DT_JITTER_TOL:.0e})"
        )
    if expected_dt is not None and abs(dt - expected_dt) > DT_JITTER_TOL:
        raise ValidationError(f"{path}: dt {dt} differs from manifest dt {expected_dt}")

    probes = data[:, probe_cols].T
    motions = data[:, [header.index(ch) for ch in CHANNELS]].T
    return Realization(label=label, seed=seed, dt=float(dt), probes=probes, motions=motions)


def write_manifest(path: str | os.PathLike, manifest: dict) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_campaign(manifest_path: str | os.PathLike) -> tuple[list[Realization], dict]:
    """Load every realization listed in a campaign manifest.

    Returns the realizations and the parsed manifest.  Any missing file,
    ragged row, or grid inconsistency raises a validation error naming
    the offending file.
    """
    manifest_path = os.fspath(manifest_path)
    if not os.path.exists(manifest_path):
        raise ValidationError(f"manifest not found: {manifest_path}")
    with open(manifest_path) as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"manifest is not valid JSON: {manifest_path}: {exc}") from None
    base = os.path.dirname(manifest_path)
    dt = manifest.get("dt")
    realizations = []
    for state in manifest.get("states", []):
        label = state["label"]
        for seed, fname in zip(state["seeds"], state["files"]):
            fpath = os.path.join(base, fname)
            realizations.append(
                read_realization_csv(fpath, label=label, seed=int(seed), expected_dt=dt)
            )
    if not realizations:
        raise ValidationError(f"manifest lists no realizations: {manifest_path}")
    return realizations, manifest


def split_seeds(
    realizations: list[Realization],
    n_train: int,
    n_test: int,
    seed: int = 0,
) -> tuple[list[Realization], list[Realization]]:
    """Deterministic per-state train/test split at realization granularity.

    Within each sea state the realizations are shuffled by a stream named
    by (seed, state label); the first ``n_train`` go to training and the
    next ``n_test`` to the held-out set.  No realization appears in both.
    """
    if n_train < 1 or n_test < 1:
        raise ValidationError("need at least one training and one test realization per state")
    by_label: dict[str, list[Realization]] = {}
    for r in realizations:
        by_label.setdefault(r.label, []).append(r)
    train, test = [], []
    for label in sorted(by_label):
        group = sorted(by_label[label], key=lambda r: r.seed)
        if len(group) < n_train + n_test:
            raise ValidationError(
                f"state {label} has {len(group)} realizations, "
                f"need {n_train + n_test} for the requested split"
            )
        order = stream(seed, "split", label).permutation(len(group))
        picked = [group[i] for i in order]
        train.extend(picked[:n_train])
        test.extend(picked[n_train:n_train + n_test])
    return train, test


@dataclass(frozen=True)
class Normalization:
    """Per-channel affine scaling fitted on training data only."""

    probe_mean: np.ndarray
    probe_scale: np.ndarray
    motion_mean: np.ndarray
    motion_scale: np.ndarray

    def apply_probes(self, x: np.ndarray) -> np.ndarray:
        # x has probe index on the last axis.
        return (x - self.probe_mean) / self.probe_scale

    def apply_motions(self, y: np.ndarray) -> np.ndarray:
        return (y - self.motion_mean) / self.motion_scale

    def invert_motions(self, y: np.ndarray) -> np.ndarray:
        return y * self.motion_scale + self.motion_mean

    def to_dict(self) -> dict:
        return {
            "probe_mean": self.probe_mean.tolist(),
            "probe_scale": self.probe_scale.tolist(),
            "motion_mean": self.motion_mean.tolist(),
            "motion_scale": self.motion_scale.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Normalization":
        return cls(
            probe_mean=np.asarray(d["probe_mean"], dtype=float),
            probe_scale=np.asarray(d["probe_scale"], dtype=float),
            motion_mean=np.asarray(d["motion_mean"], dtype=float),
            motion_scale=np.asarray(d["motion_scale"], dtype=float),
        )


def fit_normalization(realizations: list[Realization]) -> Normalization:
    """Pooled mean and standard deviation over the given realizations."""
    if not realizations:
        raise ValidationError("cannot fit normalization on an empty set")
    n_probes = realizations[0].n_probes
    for r in realizations:
        if r.n_probes != n_probes:
            raise ValidationError(f"probe count mismatch in {r.name}")
    probes = np.concatenate([r.probes for r in realizations], axis=1)
    motions = np.concatenate([r.motions for r in realizations], axis=1)
    floor = 1e-12  # guard against constant channels
    return Normalization(
        probe_mean=probes.mean(axis=1),
        probe_scale=np.maximum(probes.std(axis=1), floor),
        motion_mean=motions.mean(axis=1),
        motion_scale=np.maximum(motions.std(axis=1), floor),
    )


@dataclass(frozen=True)
class StencilConfig:
    """Causal window geometry for sample extraction."""

    window: int = 99   # K: number of past steps; the window holds K+1 rows
    stride: int = 1    # subsampling of target times

    def __post_init__(self):
        if self.window < 1:
            raise ValidationError(f"window must be >= 1, got {self.window}")
        if self.stride < 1:
            raise ValidationError(f"stride must be >= 1, got {self.stride}")


@dataclass
class SampleSet:
    """Stencil samples ready for training or prediction."""

    x: np.ndarray               # (M, K+1, n_probes), newest row first
    y: np.ndarray               # (M, 3)
    t_index: np.ndarray         # (M,) target sample index in the source series
    normalization: Normalization | None = None
    source: str = ""            # realization name(s), for reporting

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    @property
    def window(self) -> int:
        return int(self.x.shape[1]) - 1


def build_stencil(
    r: Realization,
    cfg: StencilConfig,
    normalization: Normalization | None = None,
) -> SampleSet:
    """Extract causal windows and aligned targets from one realization.

    Window rows are ordered newest to oldest: row j of sample m holds the
    probe vector at ``t_m - j dt``.  Targets before index K are dropped,
    so a series of length L yields ``floor((L - 1 - K) / stride) + 1``
    samples.
    """
    k = cfg.window
    if r.n_samples <= k:
        raise ValidationError(
            f"{r.name}: series length {r.n_samples} cannot support window {k}"
        )
    # sliding_window_view gives windows oldest-first; flip to newest-first.
    swv = np.lib.stride_tricks.sliding_window_view(r.probes, k + 1, axis=1)
    windows = np.flip(swv[:, ::cfg.stride, :], axis=2)      # (n_probes, M, K+1)
    x = np.ascontiguousarray(np.transpose(windows, (1, 2, 0)), dtype=float)
    t_index = np.arange(k, r.n_samples, cfg.stride, dtype=int)
    y = r.motions[:, t_index].T.copy()
    if normalization is not None:
        x = normalization.apply_probes(x)
        y = normalization.apply_motions(y)
    return SampleSet(x=x, y=y, t_index=t_index, normalization=normalization, source=r.name)


def merge_samplesets(sets: list[SampleSet]) -> SampleSet:
    """Concatenate sample sets that share window geometry and scaling."""
    if not sets:
        raise ValidationError("nothing to merge")
    w = sets[0].window
    norm = sets[0].normalization
    for s in sets[1:]:
        if s.window != w:
            raise ValidationError("cannot merge sample sets with different windows")
        if (s.normalization is None) != (norm is None):
            raise ValidationError("cannot merge normalized and raw sample sets")
    return SampleSet(
        x=np.concatenate([s.x for s in sets], axis=0),
        y=np.concatenate([s.y for s in sets], axis=0),
        t_index=np.concatenate([s.t_index for s in sets]),
        normalization=norm,
        source=",".join(s.source for s in sets),
    )


def save_sampleset(path: str | os.PathLike, s: SampleSet) -> None:
    extra = {}
    if s.normalization is not None:
        extra = {f"norm_{k}": np.asarray(v) for k, v in s.normalization.to_dict().items()}
    np.savez_compressed(path, x=s.x, y=s.y, t_index=s.t_index, source=s.source, **extra)


def load_sampleset(path: str | os.PathLike) -> SampleSet:
    path = os.fspath(path)
    if not os.path.exists(path):
        raise ValidationError(f"sample file not found: {path}")
    with np.load(path, allow_pickle=False) as z:
        norm = None
        if "norm_probe_mean" in z:
            norm = Normalization(
                probe_mean=z["norm_probe_mean"],
                probe_scale=z["norm_probe_scale"],
                motion_mean=z["norm_motion_mean"],
                motion_scale=z["norm_motion_scale"],
            )
        return SampleSet(
            x=z["x"], y=z["y"], t_index=z["t_index"],
            normalization=norm, source=str(z["source"]),
        )
