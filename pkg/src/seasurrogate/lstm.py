"""Stacked LSTM regressor with exact analytic gradients, in plain numpy.

The network maps a causal window of probe history to the instantaneous
motion vector.  Window rows arrive newest-first (the stencil layout);
the recurrence consumes them oldest-first so the final hidden state
summarizes the full window ending at the target instant.  State is not
carried between windows.

Each layer uses the standard four-gate cell

    i = sig(a_i),  f = sig(a_f),  g = tanh(a_g),  o = sig(a_o)
    c_t = f * c_{t-1} + i * g,    h_t = o * tanh(c_t)

with gate pre-activations a = x_t Wx + h_{t-1} Wh + b stacked in the
order (i, f, g, o).  A linear readout on the top layer's final hidden
state produces the outputs.  Everything runs in float64; the backward
pass is the exact reverse-mode differential of the forward pass, which
makes finite-difference agreement a meaningful test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit as _sigmoid

from .errors import NumericError, ValidationError
from .rng import stream


@dataclass(frozen=True)
class LstmArch:
    """Network shape."""

    input_dim: int = 1
    hidden: int = 32
    layers: int = 2
    output_dim: int = 3

    def __post_init__(self):
        if min(self.input_dim, self.hidden, self.layers, self.output_dim) < 1:
            raise ValidationError(f"all architecture dimensions must be >= 1: {self}")

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim, "hidden": self.hidden,
            "layers": self.layers, "output_dim": self.output_dim,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LstmArch":
        return cls(**{k: int(v) for k, v in d.items()})


class LstmParams:
    """Parameter bundle; also doubles as the gradient container."""

    __slots__ = ("arch", "wx", "wh", "b", "w_out", "b_out")

    def __init__(self, arch: LstmArch, wx, wh, b, w_out, b_out):
        self.arch = arch
        self.wx = wx            # list per layer, (d_in, 4H)
        self.wh = wh            # list per layer, (H, 4H)
        self.b = b              # list per layer, (4H,)
        self.w_out = w_out      # (H, output_dim)
        self.b_out = b_out      # (output_dim,)

    def as_list(self) -> list[np.ndarray]:
        """Arrays in a fixed canonical order (shared with gradients)."""
        return [*self.wx, *self.wh, *self.b, self.w_out, self.b_out]

    def copy(self) -> "LstmParams":
        return LstmParams(
            self.arch,
            [w.copy() for w in self.wx],
            [w.copy() for w in self.wh],
            [w.copy() for w in self.b],
            self.w_out.copy(),
            self.b_out.copy(),
        )

    @classmethod
    def zeros(cls, arch: LstmArch) -> "LstmParams":
        h = arch.hidden
        wx, wh, b = [], [], []
        for layer in range(arch.layers):
            d_in = arch.input_dim if layer == 0 else h
            wx.append(np.zeros((d_in, 4 * h)))
            wh.append(np.zeros((h, 4 * h)))
            b.append(np.zeros(4 * h))
        return cls(arch, wx, wh, b, np.zeros((h, arch.output_dim)), np.zeros(arch.output_dim))

    @property
    def n_params(self) -> int:
        return sum(a.size for a in self.as_list())


def init_params(arch: LstmArch, seed: int = 0) -> LstmParams:
    """Uniform fan-in initialization; forget-gate biases start at one.

    Weights are drawn from U(-k, k) with k = 1/sqrt(hidden).  The forget
    bias offset keeps early training from washing out the cell state.
    """
    h = arch.hidden
    k = 1.0 / math.sqrt(h)
    params = LstmParams.zeros(arch)
    for layer in range(arch.layers):
        d_in = arch.input_dim if layer == 0 else h
        rng = stream(seed, "init", "layer", layer)
        params.wx[layer] = rng.uniform(-k, k, size=(d_in, 4 * h))
        params.wh[layer] = rng.uniform(-k, k, size=(h, 4 * h))
        params.b[layer] = rng.uniform(-k, k, size=4 * h)
        params.b[layer][h:2 * h] += 1.0
    rng = stream(seed, "init", "readout")
    params.w_out = rng.uniform(-k, k, size=(h, arch.output_dim))
    params.b_out = rng.uniform(-k, k, size=arch.output_dim)
    return params


def flatten_params(params: LstmParams) -> np.ndarray:
    return np.concatenate([a.ravel() for a in params.as_list()])


def unflatten_params(arch: LstmArch, vec: np.ndarray) -> LstmParams:
    out = LstmParams.zeros(arch)
    pos = 0
    for a in out.as_list():
        a.flat[:] = vec[pos:pos + a.size]
        pos += a.size
    if pos != vec.size:
        raise ValidationError(f"parameter vector has {vec.size} entries, expected {pos}")
    return out


def _check_input(params: LstmParams, x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[np.newaxis]
    if x.ndim != 3 or x.shape[2] != params.arch.input_dim:
        raise ValidationError(
            f"input must be (batch, steps, {params.arch.input_dim}), got {x.shape}"
        )
    if x.shape[1] < 1:
        raise ValidationError("input window is empty")
    return x, squeeze


def forward(params: LstmParams, x: np.ndarray, want_cache: bool = False):
    """Map windows to outputs.

    Parameters
    ----------
    x : ndarray
        ``(batch, K+1, input_dim)`` or ``(K+1, input_dim)``, rows
        newest-first.
    want_cache : bool
        Also return the intermediate activations needed by ``backward``.

    Returns
    -------
    y : ndarray, ``(batch, output_dim)`` (or ``(output_dim,)`` unbatched)
    cache : only when requested.
    """
    x, squeeze = _check_input(params, x)
    arch = params.arch
    hdim, n_layers = arch.hidden, arch.layers
    bsz, steps = x.shape[0], x.shape[1]
    xs = np.ascontiguousarray(x[:, ::-1, :].transpose(1, 0, 2))  # chronological (T, B, D)

    layers = []
    inputs = xs
    for layer in range(n_layers):
        wx, wh, bias = params.wx[layer], params.wh[layer], params.b[layer]
        gi = np.empty((steps, bsz, hdim))
        gf = np.empty((steps, bsz, hdim))
        gg = np.empty((steps, bsz, hdim))
        go = np.empty((steps, bsz, hdim))
        cs = np.empty((steps, bsz, hdim))
        tc = np.empty((steps, bsz, hdim))
        hs = np.empty((steps, bsz, hdim))
        h = np.zeros((bsz, hdim))
        c = np.zeros((bsz, hdim))
        for t in range(steps):
            a = inputs[t] @ wx + h @ wh + bias
            i = _sigmoid(a[:, :hdim])
            f = _sigmoid(a[:, hdim:2 * hdim])
            g = np.tanh(a[:, 2 * hdim:3 * hdim])
            o = _sigmoid(a[:, 3 * hdim:])
            c = f * c + i * g
            tch = np.tanh(c)
            h = o * tch
            if not np.all(np.isfinite(h)):
                raise NumericError(f"non-finite activation in layer {layer} at step {t}")
            gi[t], gf[t], gg[t], go[t] = i, f, g, o
            cs[t], tc[t], hs[t] = c, tch, h
        layers.append({"i": gi, "f": gf, "g": gg, "o": go, "c": cs, "tc": tc, "h": hs})
        inputs = hs

    y = layers[-1]["h"][-1] @ params.w_out + params.b_out
    if squeeze:
        y = y[0]
    if not want_cache:
        return y
    cache = {"xs": xs, "layers": layers, "batch": bsz, "steps": steps}
    return y, cache


def backward(params: LstmParams, cache: dict, dy: np.ndarray) -> LstmParams:
    """Exact gradients of sum(dy * y) w.r.t. every parameter.

    ``dy`` is the loss gradient at the outputs, shape
    ``(batch, output_dim)``.  Returns a params-shaped container.
    """
    arch = params.arch
    hdim, n_layers = arch.hidden, arch.layers
    bsz, steps = cache["batch"], cache["steps"]
    dy = np.asarray(dy, dtype=float)
    if dy.shape != (bsz, arch.output_dim):
        raise ValidationError(f"dy must be ({bsz}, {arch.output_dim}), got {dy.shape}")

    grads = LstmParams.zeros(arch)
    layers = cache["layers"]
    h_last = layers[-1]["h"][-1]
    grads.w_out = h_last.T @ dy
    grads.b_out = dy.sum(axis=0)

    # dh_above[t]: gradient arriving at the top layer's h_t from outside
    # the recurrence; only the final step receives readout gradient.
    dh_above = np.zeros((steps, bsz, hdim))
    dh_above[-1] = dy @ params.w_out.T

    for layer in range(n_layers - 1, -1, -1):
        lc = layers[layer]
        below = layers[layer - 1]["h"] if layer > 0 else cache["xs"]
        wx, wh = params.wx[layer], params.wh[layer]
        dwx = grads.wx[layer]
        dwh = grads.wh[layer]
        db = grads.b[layer]
        dx_below = np.zeros((steps, bsz, below.shape[2])) if layer > 0 else None

        dh_rec = np.zeros((bsz, hdim))
        dc_rec = np.zeros((bsz, hdim))
        for t in range(steps - 1, -1, -1):
            i, f, g, o = lc["i"][t], lc["f"][t], lc["g"][t], lc["o"][t]
            tch = lc["tc"][t]
            c_prev = lc["c"][t - 1] if t > 0 else 0.0
            h_prev = lc["h"][t - 1] if t > 0 else None

            dh = dh_above[t] + dh_rec
            do = dh * tch
            dc = dh * o * (1.0 - tch * tch) + dc_rec
            di = dc * g
            dg = dc * i
            df = dc * c_prev if t > 0 else np.zeros_like(dc)
            dc_rec = dc * f

            da = np.concatenate(
                [di * i * (1.0 - i), df * f * (1.0 - f),
                 dg * (1.0 - g * g), do * o * (1.0 - o)],
                axis=1,
            )
            x_t = below[t]
            dwx += x_t.T @ da
            db += da.sum(axis=0)
            if h_prev is not None:
                dwh += h_prev.T @ da
            dh_rec = da @ wh.T
            if dx_below is not None:
                dx_below[t] = da @ wx.T
        if dx_below is not None:
            dh_above = dx_below
    return grads


def predict(params: LstmParams, x: np.ndarray, batch: int = 4096) -> np.ndarray:
    """Forward pass over many samples in memory-bounded chunks."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        return forward(params, x)
    out = np.empty((x.shape[0], params.arch.output_dim))
    for start in range(0, x.shape[0], batch):
        out[start:start + batch] = forward(params, x[start:start + batch])
    return out


def predict_series(params: LstmParams, realization, cfg, normalization=None,
                   batch: int = 4096) -> np.ndarray:
    """Predicted motion series aligned with a realization's time grid.

    Returns ``(output_dim, L)``; the first K samples have no complete
    causal window and are NaN.  When a normalization is supplied, probe
    windows are scaled on the way in and predictions are mapped back to
    physical units on the way out.
    """
    from .dataset import build_stencil  # local import avoids a cycle

    samples = build_stencil(realization, cfg, normalization=normalization)
    y = predict(params, samples.x, batch=batch)
    if normalization is not None:
        y = normalization.invert_motions(y)
    out = np.full((params.arch.output_dim, realization.n_samples), np.nan)
    out[:, samples.t_index] = y.T
    return out
