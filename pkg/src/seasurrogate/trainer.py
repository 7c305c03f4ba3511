"""Minibatch training loop: Adam, gradient clipping, early stopping,
checkpoints.

Determinism contract: given the same initial parameters, sample sets,
and configuration, ``train`` produces bit-identical parameters.  All
shuffling comes from named streams keyed by the config seed and the
epoch index.
"""

from __future__ import annotations

import base64
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .dataset import Normalization, SampleSet, StencilConfig
from .errors import TrainingDiverged, ValidationError
from .losses import LossConfig, loss_and_grad
from .lstm import LstmArch, LstmParams, backward, forward
from .rng import stream


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings."""

    epochs: int = 40
    batch_size: int = 512
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    grad_clip: float = 5.0      # global L2 norm ceiling; <= 0 disables
    patience: int = 8           # consecutive non-improving epochs tolerated
    min_delta: float = 0.0      # required improvement in validation loss
    shuffle_seed: int = 0
    loss: LossConfig = field(default_factory=LossConfig)

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValidationError("epochs and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValidationError("Adam betas must lie in [0, 1)")
        if self.patience < 1:
            raise ValidationError("patience must be >= 1")


class Adam:
    """Bias-corrected adaptive moment optimizer over a list of arrays."""

    def __init__(self, shapes_like: list[np.ndarray], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(a) for a in shapes_like]
        self.v = [np.zeros_like(a) for a in shapes_like]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray],
             lr: float | None = None) -> None:
        """Update ``params`` in place."""
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise ValidationError("optimizer state does not match parameter structure")
        if lr is None:
            lr = self.lr
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def gradient_norm(grads: LstmParams) -> float:
    return math.sqrt(sum(float(np.sum(a * a)) for a in grads.as_list()))


def clip_gradients(grads: LstmParams, max_norm: float) -> float:
    """Scale gradients in place to the global-norm ceiling; returns the
    pre-clip norm."""
    norm = gradient_norm(grads)
    if max_norm > 0 and norm > max_norm:
        factor = max_norm / norm
        for a in grads.as_list():
            a *= factor
    return norm


def evaluate_loss(params: LstmParams, data: SampleSet, loss_cfg: LossConfig,
                  batch: int = 4096) -> float:
    """Mean objective over a sample set, computed in chunks."""
    if data.n == 0:
        raise ValidationError("cannot evaluate on an empty sample set")
    total = 0.0
    for start in range(0, data.n, batch):
        xb = data.x[start:start + batch]
        yb = data.y[start:start + batch]
        value, _ = loss_and_grad(loss_cfg, yb, forward(params, xb))
        total += value * xb.shape[0]
    return total / data.n


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    grad_norm: float  # mean pre-clip norm across batches
    lr: float


@dataclass
class TrainResult:
    params: LstmParams
    history: list[EpochRecord]
    best_epoch: int
    best_val: float
    stopped_early: bool


def train(
    params: LstmParams,
    train_set: SampleSet,
    cfg: TrainConfig,
    val_set: SampleSet | None = None,
    callback=None,
) -> TrainResult:
    """Optimize ``params`` in place-copy semantics: the input object is
    left untouched and the best-validation snapshot is returned.

    When no validation set is given, the epoch training loss drives
    early stopping.  Non-finite losses or gradients abort with the last
    finite parameter state attached to the exception.
    """
    if train_set.n < 1:
        raise ValidationError("empty training set")
    work = params.copy()
    arrays = work.as_list()
    adam = Adam(arrays, lr=cfg.learning_rate, beta1=cfg.beta1,
                beta2=cfg.beta2, eps=cfg.eps)
    best = work.copy()
    best_val = math.inf
    best_epoch = -1
    bad_epochs = 0
    history: list[EpochRecord] = []
    stopped_early = False

    for epoch in range(cfg.epochs):
        order = stream(cfg.shuffle_seed, "shuffle", epoch).permutation(train_set.n)
        run_loss = 0.0
        norm_sum = 0.0
        n_batches = 0
        for start in range(0, train_set.n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            xb = train_set.x[idx]
            yb = train_set.y[idx]
            y_hat, cache = forward(work, xb, want_cache=True)
            value, dy = loss_and_grad(cfg.loss, yb, y_hat)
            if not math.isfinite(value):
                raise TrainingDiverged(
                    f"loss became {value}", epoch=epoch, batch=n_batches,
                    last_good_params=best if best_epoch >= 0 else params,
                )
            grads = backward(work, cache, dy)
            norm = clip_gradients(grads, cfg.grad_clip)
            if not math.isfinite(norm):
                raise TrainingDiverged(
                    "non-finite gradients", epoch=epoch, batch=n_batches,
                    last_good_params=best if best_epoch >= 0 else params,
                )
            adam.step(arrays, grads.as_list())
            run_loss += value * xb.shape[0]
            norm_sum += norm
            n_batches += 1
        train_loss = run_loss / train_set.n
        val_loss = (
            evaluate_loss(work, val_set, cfg.loss) if val_set is not None else train_loss
        )
        record = EpochRecord(
            epoch=epoch, train_loss=train_loss, val_loss=val_loss,
            grad_norm=norm_sum / max(n_batches, 1), lr=cfg.learning_rate,
        )
        history.append(record)
        if callback is not None:
            callback(record)

        if val_loss < best_val - cfg.min_delta:
            best_val = val_loss
            best = work.copy()
            best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs > cfg.patience:
                stopped_early = True
                break

    if best_epoch < 0:  # never improved; keep the last state
        best, best_epoch, best_val = work.copy(), len(history) - 1, history[-1].val_loss
    return TrainResult(
        params=best, history=history, best_epoch=best_epoch,
        best_val=best_val, stopped_early=stopped_early,
    )


def history_to_rows(history: list[EpochRecord]) -> list[dict]:
    return [
        {
            "epoch": r.epoch,
            "train_loss": r.train_loss,
            "val_loss": r.val_loss,
            "grad_norm": r.grad_norm,
            "lr": r.lr,
        }
        for r in history
    ]


@dataclass
class Checkpoint:
    params: LstmParams
    normalization: Normalization | None
    stencil: StencilConfig | None
    meta: dict


def save_checkpoint(
    path: str | os.PathLike,
    params: LstmParams,
    normalization: Normalization | None = None,
    stencil: StencilConfig | None = None,
    meta: dict | None = None,
) -> None:
    """Serialize weights and the preprocessing needed to reuse them.

    Plain JSON with the flattened float64 weight vector base64-encoded
    little-endian; identical inputs give identical files.
    """
    from .lstm import flatten_params

    vec = flatten_params(params)
    blob = base64.b64encode(vec.astype("<f8").tobytes()).decode("ascii")
    doc = {
        "kind": "checkpoint",
        "arch": params.arch.to_dict(),
        "weights_b64": blob,
        "normalization": normalization.to_dict() if normalization else None,
        "stencil": {"window": stencil.window, "stride": stencil.stride} if stencil else None,
        "meta": meta or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path: str | os.PathLike) -> Checkpoint:
    from .lstm import unflatten_params

    path = os.fspath(path)
    if not os.path.exists(path):
        raise ValidationError(f"checkpoint not found: {path}")
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"checkpoint is not valid JSON: {path}: {exc}") from None
    if doc.get("kind") != "checkpoint":
        raise ValidationError(f"not a checkpoint file: {path}")
    arch = LstmArch.from_dict(doc["arch"])
    vec = np.frombuffer(base64.b64decode(doc["weights_b64"]), dtype="<f8")
    params = unflatten_params(arch, np.array(vec))
    norm = Normalization.from_dict(doc["normalization"]) if doc.get("normalization") else None
    stencil = StencilConfig(**doc["stencil"]) if doc.get("stencil") else None
    return Checkpoint(params=params, normalization=norm, stencil=stencil,
                      meta=doc.get("meta", {}))
