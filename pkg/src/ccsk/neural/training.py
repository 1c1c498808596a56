"""Adam mini-batch training with early stopping on validation loss."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..validation import ParameterError, check_windows, derive_seed, make_rng
from .config import NetConfig, TrainingConfig
from .network import NetParams, bce_loss, init_params, loss_and_grad, predict_proba

__all__ = ["TrainingDivergedError", "History", "Adam", "train", "split_train_val"]

log = logging.getLogger(__name__)


class TrainingDivergedError(ArithmeticError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    best_epoch: int = -1
    stopped_early: bool = False

    @property
    def epochs(self) -> int:
        return len(self.train_loss)

    def as_dict(self) -> dict:
        return {
            "train_loss": list(self.train_loss),
            "train_acc": list(self.train_acc),
            "val_loss": list(self.val_loss),
            "val_acc": list(self.val_acc),
            "best_epoch": self.best_epoch,
            "stopped_early": self.stopped_early,
        }


class Adam:
    def __init__(self, params: NetParams, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.tensors.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.tensors.items()}
        self.t = 0

    def step(self, params: NetParams, grads: dict[str, np.ndarray]):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        lr_t = self.lr * math.sqrt(1.0 - b2**self.t) / (1.0 - b1**self.t)
        for name in params.names():
            g = grads[name]
            m, v = self.m[name], self.v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            params.tensors[name] -= lr_t * m / (np.sqrt(v) + self.eps)


def split_train_val(n: int, fraction: float, seed):
    order = make_rng(seed).permutation(n)
    n_val = max(1, int(round(n * fraction)))
    if n_val >= n:
        raise ParameterError("validation split leaves no training data")
    return order[n_val:], order[:n_val]


def _evaluate(X, y, params):
    p1 = predict_proba(X, params)[:, 1]
    return bce_loss(p1, y), float(np.mean((p1 > 0.5) == (y > 0.5)))


def train(X, y, net_cfg: NetConfig, tr_cfg: TrainingConfig, params: NetParams | None = None,
          verbose: bool = False):
    """Fit the window classifier; returns ``(best_params, history)``.

    A ``validation_fraction`` share of the examples is held out. Training
    stops after ``patience`` epochs without a new best validation loss, or
    after ``max_epochs``. The returned parameters are the best-validation
    checkpoint. Shuffling and dropout masks derive from ``tr_cfg.seed``.
    """
    X = check_windows(X, net_cfg.window_length)
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size != X.shape[0]:
        raise ParameterError("one label per window required")
    if X.shape[0] < tr_cfg.batch_size:
        raise ParameterError(f"dataset of {X.shape[0]} is smaller than batch_size={tr_cfg.batch_size}")
    seed = tr_cfg.seed
    tr_idx, va_idx = split_train_val(X.shape[0], tr_cfg.validation_fraction, derive_seed(seed, 0))
    Xtr, ytr, Xva, yva = X[tr_idx], y[tr_idx], X[va_idx], y[va_idx]
    params = params.copy() if params is not None else init_params(net_cfg, derive_seed(seed, 1))
    opt = Adam(params, tr_cfg.learning_rate, tr_cfg.adam_beta1, tr_cfg.adam_beta2, tr_cfg.adam_eps)
    history = History()
    best = None
    best_loss = math.inf
    stale = 0
    bs = tr_cfg.batch_size
    for epoch in range(tr_cfg.max_epochs):
        order = make_rng(derive_seed(seed, 2, epoch)).permutation(Xtr.shape[0])
        losses = []
        for b, start in enumerate(range(0, order.size, bs)):
            idx = order[start : start + bs]
            loss, grads = loss_and_grad(Xtr[idx], ytr[idx], params, seed=derive_seed(seed, 3, epoch, b))
            if not math.isfinite(loss):
                raise TrainingDivergedError(f"loss became {loss} at epoch {epoch}", history)
            opt.step(params, grads)
            losses.append(loss * idx.size)
        history.train_loss.append(float(np.sum(losses) / order.size))
        _, tr_acc = _evaluate(Xtr, ytr, params)
        va_loss, va_acc = _evaluate(Xva, yva, params)
        if not math.isfinite(va_loss):
            raise TrainingDivergedError(f"validation loss became {va_loss} at epoch {epoch}", history)
        history.train_acc.append(tr_acc)
        history.val_loss.append(va_loss)
        history.val_acc.append(va_acc)
        if verbose:
            log.info("epoch %d loss %.4f acc %.4f val_loss %.4f val_acc %.4f",
                     epoch, history.train_loss[-1], tr_acc, va_loss, va_acc)
        if va_loss < best_loss:
            best_loss = va_loss
            best = params.copy()
            history.best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= tr_cfg.patience:
                history.stopped_early = True
                break
    return best, history
