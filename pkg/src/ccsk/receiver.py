"""Window scoring and argmax symbol decisions.

Each received frame is split into ``M`` windows and every window is scored on
its own by a binary detector (probability that it holds the Cubic segment).
The symbol is the table entry of the highest-scoring window. Scores are not
normalised across windows.

Detectors are sklearn-style classifiers: ``predict_proba(X)[:, 1]`` is the
Cubic score for each row of ``X`` (shape ``(n_windows, k)``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .chaos import (
    CUBIC_CONSTANTS,
    LOGISTIC_CONSTANTS,
    LOGISTIC_R,
    StandardizationConstants,
)
from .modem import ModemConfig, SymbolMapTable, symbols_to_bits
from .validation import ParameterError, check_count, check_windows

__all__ = [
    "DetectorError",
    "split_windows",
    "info_windows",
    "residual_score",
    "residual_scores",
    "decide_symbol",
    "decide_symbols",
    "Demodulated",
    "demodulate",
    "ResidualDetector",
    "CCSKDemodulator",
]


class DetectorError(ArithmeticError):
    """A detector produced a non-finite score."""


def split_windows(r, M: int) -> list[np.ndarray]:
    """Cut a frame into ``M`` equal consecutive windows."""
    r = np.asarray(r, dtype=np.float64)
    if r.size % M:
        raise ParameterError(f"frame length {r.size} not divisible by M={M}")
    return list(r.reshape(M, r.size // M))


def info_windows(frames, cfg: ModemConfig) -> np.ndarray:
    """The ``k``-sample slot at the head of every window.

    Input ``(n, beta)``, output ``(n, M, k)``. With ``beta == M * k`` this is
    just the window split.
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    if frames.shape[1] != cfg.beta:
        raise ParameterError(f"frames have {frames.shape[1]} samples, expected beta={cfg.beta}")
    return frames.reshape(frames.shape[0], cfg.M, cfg.window)[:, :, : cfg.k]


def _cubic_pred(u):
    u = np.clip(u, -1.0, 1.0)
    return 4.0 * u**3 - 3.0 * u


def _logistic_pred(u):
    u = np.clip(u, 0.0, 1.0)
    return LOGISTIC_R * u * (1.0 - u)


def residual_scores(
    windows,
    cubic: StandardizationConstants = CUBIC_CONSTANTS,
    logistic: StandardizationConstants = LOGISTIC_CONSTANTS,
    standardized: bool = True,
) -> np.ndarray:
    """Map-consistency score for each row of ``windows``.

    The window is mapped back to each map's natural coordinates, and the mean
    squared one-step prediction error is computed under both hypotheses
    (``Rc`` for Cubic, ``Rl`` for Logistic). The score is ``Rl / (Rl + Rc)``,
    and 0.5 when both residuals vanish.
    """
    w = np.atleast_2d(np.asarray(windows, dtype=np.float64))
    if w.shape[-1] < 2:
        raise ParameterError("residual detector needs windows of at least 2 samples")
    if standardized:
        uc = w * cubic.std + cubic.mean
        ul = w * logistic.std + logistic.mean
    else:
        uc = ul = w
    k = w.shape[-1]
    rc = np.sum((uc[..., 1:] - _cubic_pred(uc[..., :-1])) ** 2, axis=-1) / k
    rl = np.sum((ul[..., 1:] - _logistic_pred(ul[..., :-1])) ** 2, axis=-1) / k
    total = rl + rc
    with np.errstate(invalid="ignore", divide="ignore"):
        score = np.where(total > 0, rl / np.where(total > 0, total, 1.0), 0.5)
    return score


def residual_score(window, consts: StandardizationConstants | None = None) -> float:
    """Score of a single window; see :func:`residual_scores`."""
    w = np.asarray(window, dtype=np.float64).ravel()
    if consts is None:
        return float(residual_scores(w)[0])
    return float(residual_scores(w, cubic=consts)[0])


def decide_symbol(p) -> int:
    """Index of the largest entry; ties go to the lowest index."""
    p = np.asarray(p, dtype=np.float64).ravel()
    if p.size == 0:
        raise ParameterError("empty probability vector")
    if not np.all(np.isfinite(p)):
        raise DetectorError(f"non-finite window score in {p!r}")
    return int(np.argmax(p))


def decide_symbols(P) -> np.ndarray:
    """Row-wise :func:`decide_symbol`; rows with non-finite entries give -1."""
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    ok = np.all(np.isfinite(P), axis=1)
    out = np.full(P.shape[0], -1, dtype=np.int64)
    if np.any(ok):
        out[ok] = np.argmax(P[ok], axis=1)
    return out


@dataclass
class Demodulated:
    symbols: np.ndarray
    bits: np.ndarray
    windows: np.ndarray
    scores: np.ndarray
    failed: np.ndarray

    @property
    def positions(self) -> np.ndarray:
        return self.windows + 1


def demodulate(frames, detector, cfg: ModemConfig, table: SymbolMapTable | None = None) -> Demodulated:
    """Split, score, decide, unmap and Gray-decode a batch of received frames.

    A frame whose scores are not finite is flagged in ``failed``; its symbol
    is reported as -1 and its bits are the complement of symbol 0's word, so
    it always counts as errored in both SER and BER.
    """
    table = table or SymbolMapTable.identity(cfg.M)
    if table.M != cfg.M:
        raise ParameterError(f"table is for M={table.M}, config has M={cfg.M}")
    win = info_windows(frames, cfg)
    n = win.shape[0]
    flat = win.reshape(n * cfg.M, cfg.k)
    scores = np.asarray(_score(detector, flat), dtype=np.float64).reshape(n, cfg.M)
    idx = decide_symbols(scores)
    failed = idx < 0
    symbols = np.where(failed, -1, table.c_to_symbol[np.where(failed, 0, idx)])
    bits = symbols_to_bits(np.where(failed, 0, symbols), cfg.M).reshape(n, cfg.bits_per_symbol)
    bits[failed] = 1 - bits[failed]
    return Demodulated(symbols, bits.ravel(), idx, scores, failed)


def _score(detector, X):
    if hasattr(detector, "predict_proba"):
        return detector.predict_proba(X)[:, 1]
    return detector(X)


class ResidualDetector(ClassifierMixin, BaseEstimator):
    """Classical map-residual window classifier.

    Needs no training: ``fit`` only records the window length. It is the
    oracle counterpart to the neural classifier and is exact on noiseless
    single-path frames.
    """

    def __init__(self, cubic_mean=CUBIC_CONSTANTS.mean, cubic_std=CUBIC_CONSTANTS.std,
                 logistic_mean=LOGISTIC_CONSTANTS.mean, logistic_std=LOGISTIC_CONSTANTS.std,
                 standardized=True):
        self.cubic_mean = cubic_mean
        self.cubic_std = cubic_std
        self.logistic_mean = logistic_mean
        self.logistic_std = logistic_std
        self.standardized = standardized

    def fit(self, X, y=None):
        X = check_windows(X)
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1])
        return self

    def predict_proba(self, X):
        X = check_windows(X)
        if X.shape[1] < 2:
            raise ParameterError("residual detector needs windows of at least 2 samples")
        p1 = residual_scores(
            X,
            StandardizationConstants(self.cubic_mean, self.cubic_std),
            StandardizationConstants(self.logistic_mean, self.logistic_std),
            self.standardized,
        )
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] > 0.5).astype(np.int64)

    def __sklearn_is_fitted__(self):
        return True


class CCSKDemodulator(BaseEstimator):
    """Frame-level symbol decisions from a window detector.

    ``predict`` maps received frames ``(n, beta)`` to symbols,
    ``predict_bits`` to the Gray-decoded bit stream. ``fit`` fits the wrapped
    detector on labelled windows when ``X`` is given.
    """

    def __init__(self, detector=None, M=4, k=32, beta=None, positions=None):
        self.detector = detector
        self.M = M
        self.k = k
        self.beta = beta
        self.positions = positions

    def _setup(self):
        self.config_ = ModemConfig(self.M, self.k, self.beta)
        self.table_ = SymbolMapTable(self.M, tuple(self.positions or ()))
        self.detector_ = self.detector if self.detector is not None else ResidualDetector()

    def fit(self, X=None, y=None):
        self._setup()
        if X is not None:
            self.detector_.fit(X, y)
        return self

    def _demod(self, frames):
        if not hasattr(self, "config_"):
            self._setup()
        check_count("M", self.M, minimum=2)
        return demodulate(frames, self.detector_, self.config_, self.table_)

    def predict(self, frames):
        return self._demod(frames).symbols

    def predict_bits(self, frames):
        return self._demod(frames).bits

    def window_scores(self, frames):
        return self._demod(frames).scores

    def score(self, frames, symbols):
        """Fraction of frames decided correctly (1 - SER)."""
        return float(np.mean(self.predict(frames) == np.asarray(symbols)))
