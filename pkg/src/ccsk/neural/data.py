"""Labelled window datasets built through the full transmit/channel chain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..channel import ChannelConfig, draw_path_gains, noise_params, _multipath
from ..modem import ModemConfig, SymbolMapTable, frame_batch
from ..receiver import info_windows
from ..validation import ParameterError, check_count, derive_rng
from .config import TrainingConfig

__all__ = ["Dataset", "generate_dataset", "received_frames", "labelled_windows"]


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    snr_db: np.ndarray

    def __len__(self):
        return self.y.size

    def __getitem__(self, idx):
        return Dataset(self.X[idx], self.y[idx], self.snr_db[idx])


def received_frames(symbols, snr_db, modem: ModemConfig, channel: ChannelConfig, rngs,
                    table: SymbolMapTable | None = None) -> np.ndarray:
    """Modulate ``symbols`` and pass frame ``i`` through the channel at ``snr_db[i]``.

    Each frame's randomness (segments, gains, noise) comes from ``rngs[i]``.
    """
    table = table or SymbolMapTable.identity(modem.M)
    symbols = np.asarray(symbols, dtype=np.int64)
    frames, _, _ = frame_batch(symbols, modem, table, rngs)
    n = symbols.size
    gains = np.stack([draw_path_gains(channel, r) for r in rngs]) if n else np.empty((0, len(channel.paths)))
    out = _multipath(frames, gains, channel.delays)
    sigmas = np.array([noise_params(s, modem).sigma for s in np.broadcast_to(snr_db, (n,))])
    for i, r in enumerate(rngs):
        if sigmas[i] > 0:
            out[i] += r.normal(0.0, sigmas[i], size=modem.beta)
    return out


def labelled_windows(frames, modem: ModemConfig, windows) -> np.ndarray:
    """The info slot of 0-based window ``windows[i]`` of frame ``i``."""
    win = info_windows(frames, modem)
    return win[np.arange(win.shape[0]), np.asarray(windows, dtype=np.int64)]


def generate_dataset(n: int, modem: ModemConfig, channel: ChannelConfig, tr_cfg: TrainingConfig,
                     seed=0, table: SymbolMapTable | None = None) -> Dataset:
    """``n/2`` Cubic-carrying and ``n/2`` Logistic windows at random training SNRs.

    Example ``i`` is a whole frame sent through ``channel`` at an Eb/N0 drawn
    uniformly from ``tr_cfg.train_snr_range_db``; label ``i % 2``. Label 1
    keeps the window holding the Cubic segment, label 0 a uniformly chosen
    other window.
    """
    check_count("n", n, minimum=2)
    if n % 2:
        raise ParameterError(f"dataset size must be even, got {n}")
    table = table or SymbolMapTable.identity(modem.M)
    lo, hi = tr_cfg.train_snr_range_db
    rngs = [derive_rng(seed, i) for i in range(n)]
    labels = np.arange(n) % 2
    symbols = np.empty(n, dtype=np.int64)
    snrs = np.empty(n)
    picks = np.empty(n, dtype=np.int64)
    for i, r in enumerate(rngs):
        symbols[i] = r.integers(modem.M)
        snrs[i] = r.uniform(lo, hi)
        c0 = table.positions[symbols[i]] - 1
        other = int(r.integers(modem.M - 1))
        picks[i] = c0 if labels[i] else (other if other < c0 else other + 1)
    frames = received_frames(symbols, snrs, modem, channel, rngs, table)
    X = labelled_windows(frames, modem, picks)
    return Dataset(X, labels, snrs)
