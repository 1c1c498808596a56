"""The window classifier network.

input (2 channels) -> BiLSTM (per-step) -> multi-head self-attention ->
dropout -> BiLSTM (final states) -> dropout -> dense -> softmax.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..validation import ParameterError, check_windows, make_rng
from . import layers
from .config import NetConfig

__all__ = [
    "NumericError",
    "NetParams",
    "param_shapes",
    "init_params",
    "zero_params",
    "embed",
    "forward",
    "predict_proba",
    "bce_loss",
    "loss_and_grad",
]

PROB_CLAMP = 1e-12


class NumericError(ArithmeticError):
    """Non-finite activation; the message names the layer."""


def param_shapes(cfg: NetConfig) -> dict[str, tuple[int, ...]]:
    H = cfg.hidden_units
    D = cfg.attention_dim
    shapes = {}
    for layer, n_in in (("lstm1", cfg.input_channels), ("lstm2", D)):
        for direction in ("fwd", "bwd"):
            shapes[f"{layer}.{direction}.Wx"] = (n_in, 4 * H)
            shapes[f"{layer}.{direction}.Wh"] = (H, 4 * H)
            shapes[f"{layer}.{direction}.b"] = (4 * H,)
    for n in "qkv":
        shapes[f"attn.W{n}"] = (2 * H, D)
        shapes[f"attn.b{n}"] = (D,)
    shapes["attn.Wo"] = (D, D)
    shapes["attn.bo"] = (D,)
    shapes["dense.W"] = (2 * H, cfg.classes)
    shapes["dense.b"] = (cfg.classes,)
    return shapes


@dataclass(eq=False)
class NetParams:
    """Named weight tensors plus the config they were built for."""

    config: NetConfig
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        expected = param_shapes(self.config)
        if set(expected) != set(self.tensors):
            missing = sorted(set(expected) - set(self.tensors))
            extra = sorted(set(self.tensors) - set(expected))
            raise ParameterError(f"parameter names mismatch: missing={missing} extra={extra}")
        for name, shape in expected.items():
            arr = np.asarray(self.tensors[name], dtype=np.float64)
            if arr.shape != shape:
                raise ParameterError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ParameterError(f"{name} contains non-finite values")
            self.tensors[name] = arr

    @property
    def fingerprint(self) -> str:
        return self.config.fingerprint()

    def __getitem__(self, name):
        return self.tensors[name]

    def names(self):
        return list(param_shapes(self.config))

    def copy(self) -> "NetParams":
        return NetParams(self.config, {k: v.copy() for k, v in self.tensors.items()})

    def equals(self, other: "NetParams") -> bool:
        return self.config == other.config and all(
            np.array_equal(self.tensors[k], other.tensors[k]) for k in self.tensors
        )

    def n_parameters(self) -> int:
        return int(sum(v.size for v in self.tensors.values()))


def init_params(cfg: NetConfig, seed=None) -> NetParams:
    """Uniform fan-in initialisation; LSTM forget-gate biases start at 1."""
    rng = make_rng(seed)
    H = cfg.hidden_units
    tensors = {}
    for name, shape in param_shapes(cfg).items():
        if name.endswith((".Wx", ".Wh")):
            bound = 1.0 / np.sqrt(H)
        elif ".W" in name:
            bound = 1.0 / np.sqrt(shape[0])
        else:
            tensors[name] = np.zeros(shape)
            if name.startswith("lstm"):
                tensors[name][H : 2 * H] = 1.0
            continue
        tensors[name] = rng.uniform(-bound, bound, size=shape)
    return NetParams(cfg, tensors)


def zero_params(cfg: NetConfig) -> NetParams:
    return NetParams(cfg, {n: np.zeros(s) for n, s in param_shapes(cfg).items()})


def embed(X, cfg: NetConfig) -> np.ndarray:
    """Stack each window with its auxiliary channel: ``(B, T) -> (B, T, 2)``."""
    if cfg.aux_channel == "zero":
        aux = np.zeros_like(X)
    elif cfg.aux_channel == "delta":
        aux = np.diff(X, axis=1, prepend=0.0)
    else:
        aux = X * X
    return np.stack([X, aux], axis=-1)


def _check(name, arr):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite activation in layer {name}")


def forward(X, params: NetParams, train: bool = False, seed=None, return_cache: bool = False):
    """Class probabilities ``(B, 2)`` for windows ``X`` of shape ``(B, T)``.

    ``train=True`` applies inverted dropout with masks drawn from ``seed``;
    inference applies none.
    """
    cfg = params.config
    X = check_windows(X, cfg.window_length)
    p = params.tensors
    x0 = embed(X, cfg)
    h1, c1 = layers.bilstm_forward(x0, p, "lstm1")
    _check("lstm1", h1)
    a, ca = layers.attention_forward(h1, p, cfg.attention_heads)
    _check("attention", a)
    rng = make_rng(seed) if train else None
    m1 = layers.dropout_mask(a.shape, cfg.dropout_p, rng) if train else None
    a_d = a * m1 if m1 is not None else a
    h2, c2 = layers.bilstm_forward(a_d, p, "lstm2", final_only=True)
    _check("lstm2", h2)
    m2 = layers.dropout_mask(h2.shape, cfg.dropout_p, rng) if train else None
    h2_d = h2 * m2 if m2 is not None else h2
    logits = h2_d @ p["dense.W"] + p["dense.b"]
    _check("dense", logits)
    probs = layers.softmax(logits)
    if not return_cache:
        return probs
    return probs, (c1, ca, m1, c2, m2, h2_d)


def predict_proba(X, params: NetParams, batch_size: int = 1024) -> np.ndarray:
    X = check_windows(X, params.config.window_length)
    out = [forward(X[i : i + batch_size], params) for i in range(0, X.shape[0], batch_size)]
    return np.concatenate(out) if out else np.empty((0, 2))


def bce_loss(p1, y) -> float:
    """Mean binary cross-entropy with probabilities clamped to [1e-12, 1 - 1e-12]."""
    p1 = np.clip(p1, PROB_CLAMP, 1.0 - PROB_CLAMP)
    y = np.asarray(y, dtype=np.float64)
    return float(-np.mean(y * np.log(p1) + (1.0 - y) * np.log(1.0 - p1)))


def _backward(probs, y, params: NetParams, cache):
    c1, ca, m1, c2, m2, h2_d = cache
    cfg = params.config
    p = params.tensors
    B = probs.shape[0]
    p1 = probs[:, 1]
    inside = (p1 > PROB_CLAMP) & (p1 < 1.0 - PROB_CLAMP)
    # d(mean BCE)/d(logit_1) = (p1 - y) / B through the 2-class softmax.
    g = np.where(inside, (p1 - y) / B, 0.0)
    dlogits = np.column_stack([-g, g])
    grads = {"dense.W": h2_d.T @ dlogits, "dense.b": dlogits.sum(axis=0)}
    dh2 = dlogits @ p["dense.W"].T
    if m2 is not None:
        dh2 = dh2 * m2
    da, g2 = layers.bilstm_backward(dh2, c2, "lstm2")
    grads.update(g2)
    if m1 is not None:
        da = da * m1
    dh1, ga = layers.attention_backward(da, p, ca)
    grads.update(ga)
    _, g1 = layers.bilstm_backward(dh1, c1, "lstm1")
    grads.update(g1)
    return grads


def loss_and_grad(X, y, params: NetParams, seed=None, train: bool = True):
    """Mean BCE over the batch and its gradient for every tensor."""
    y = np.asarray(y, dtype=np.float64).ravel()
    X = check_windows(X, params.config.window_length)
    if X.shape[0] == 0 or X.shape[0] != y.size:
        raise ParameterError("batch must be non-empty with one label per window")
    probs, cache = forward(X, params, train=train, seed=seed, return_cache=True)
    loss = bce_loss(probs[:, 1], y)
    grads = _backward(probs, y, params, cache)
    return loss, grads
