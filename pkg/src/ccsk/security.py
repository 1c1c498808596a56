"""Information leakage and the self-labelled eavesdropper experiment.

The eavesdropper knows frame timing, ``M``, ``k``, ``beta`` and the network
architecture, but not the transmitted symbols. An eavesdropper that also
knows both chaotic maps and the standardisation constants can run the
residual detector and read the link; the experiment here models one without
that knowledge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelConfig
from .modem import ModemConfig, SymbolMapTable, symbols_to_bits
from .neural.config import NetConfig, TrainingConfig
from .neural.data import labelled_windows, received_frames
from .neural.estimator import WindowClassifier
from .neural.network import init_params
from .neural.training import train
from .receiver import demodulate
from .validation import ParameterError, check_count, derive_rng, derive_seed

__all__ = [
    "LeakageResult",
    "EavesdropperConfig",
    "EavesdropperResult",
    "binary_entropy",
    "leakage_rate",
    "capture_frames",
    "self_labels",
    "simulate_eavesdropper",
]


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"probability {p} outside [0, 1]")
    return -sum(q * math.log2(q) for q in (p, 1.0 - p) if q > 0.0)


def leakage_rate(pe: float) -> float:
    """Bits learned per transmitted bit by a receiver with bit error rate ``pe``.

    ``1 + pe log2 pe + (1 - pe) log2 (1 - pe)``, with ``0 log2 0 = 0``.
    """
    pe = float(pe)
    if not 0.0 <= pe <= 1.0 or math.isnan(pe):
        raise ParameterError(f"error probability {pe} outside [0, 1]")
    out = 1.0
    for q in (pe, 1.0 - pe):
        if q > 0.0:
            out += q * math.log2(q)
    return out


@dataclass(frozen=True)
class LeakageResult:
    pe: float
    leakage: float

    @classmethod
    def from_ber(cls, pe: float) -> "LeakageResult":
        return cls(pe, leakage_rate(pe))


@dataclass(frozen=True)
class EavesdropperConfig:
    """How the eavesdropper labels the windows it captured.

    ``label_source="genie"`` uses the true symbols (control arm).
    ``"self_estimated"`` labels each frame with the decision of a bootstrap
    detector: an untrained network (``bootstrap="untrained"``) or uniformly
    random guesses (``"random"``). Each further round relabels with the
    network trained in the previous round.
    """

    label_source: str = "self_estimated"
    bootstrap: str = "untrained"
    rounds: int = 1

    def __post_init__(self):
        if self.label_source not in ("self_estimated", "genie"):
            raise ParameterError(f"unknown label_source {self.label_source!r}")
        if self.bootstrap not in ("untrained", "random"):
            raise ParameterError(f"unknown bootstrap detector {self.bootstrap!r}")
        check_count("rounds", self.rounds, minimum=1)


@dataclass
class EavesdropperResult:
    ebn0_db: list[float]
    legit_ber: list[float]
    eve_ber: list[float]
    legit_ser: list[float]
    eve_ser: list[float]
    bits: int
    eve_label_accuracy: list[float] = field(default_factory=list)

    @property
    def eve_leakage(self) -> list[float]:
        return [leakage_rate(p) for p in self.eve_ber]

    @property
    def legit_leakage(self) -> list[float]:
        return [leakage_rate(p) for p in self.legit_ber]


def capture_frames(n: int, modem: ModemConfig, channel: ChannelConfig, tr_cfg: TrainingConfig,
                   seed, table: SymbolMapTable | None = None):
    """Frames observed at training SNRs: ``(received, symbols, snr_db)``."""
    table = table or SymbolMapTable.identity(modem.M)
    lo, hi = tr_cfg.train_snr_range_db
    rngs = [derive_rng(seed, i) for i in range(n)]
    symbols = np.array([r.integers(modem.M) for r in rngs], dtype=np.int64)
    snrs = np.array([r.uniform(lo, hi) for r in rngs])
    return received_frames(symbols, snrs, modem, channel, rngs, table), symbols, snrs


def self_labels(frames, positive_windows, modem: ModemConfig, seed):
    """Balanced window dataset from per-frame window decisions.

    Frame ``i`` contributes its decided window (label 1) and one other window
    picked uniformly (label 0).
    """
    positive_windows = np.asarray(positive_windows, dtype=np.int64)
    n = positive_windows.size
    rng = derive_rng(seed)
    other = rng.integers(modem.M - 1, size=n)
    negative = np.where(other < positive_windows, other, other + 1)
    X = np.concatenate([
        labelled_windows(frames, modem, positive_windows),
        labelled_windows(frames, modem, negative),
    ])
    y = np.concatenate([np.ones(n, dtype=np.int64), np.zeros(n, dtype=np.int64)])
    return X, y


def _evaluate_ber(clf, modem, channel, table, ebn0_grid, symbols_per_point, seed):
    ser, ber = [], []
    for j, ebn0 in enumerate(ebn0_grid):
        frames, symbols, _ = capture_frames(
            symbols_per_point, modem, channel,
            TrainingConfig(train_snr_range_db=(ebn0, ebn0), channel_kind=channel.kind),
            derive_seed(seed, 7, j), table,
        )
        out = demodulate(frames, clf, modem, table)
        tx_bits = symbols_to_bits(symbols, modem.M)
        ser.append(float(np.mean(out.symbols != symbols)))
        ber.append(float(np.mean(out.bits != tx_bits)))
    return ser, ber


def simulate_eavesdropper(cfg: EavesdropperConfig, modem: ModemConfig, channel: ChannelConfig,
                          net_cfg: NetConfig, tr_cfg: TrainingConfig, ebn0_grid,
                          symbols_per_point: int = 10_000, seed: int = 0,
                          table: SymbolMapTable | None = None) -> EavesdropperResult:
    """Train a legitimate and an eavesdropping receiver and sweep their BER.

    Both arms observe the same captured transmissions (``tr_cfg.dataset_size
    // 2`` frames at training SNRs). The legitimate arm labels windows with the
    true symbols; the eavesdropper uses ``cfg.label_source``. Both are then
    evaluated on the same held-out transmissions at every ``ebn0_grid`` point.
    """
    table = table or SymbolMapTable.identity(modem.M)
    if net_cfg.window_length != modem.k:
        raise ParameterError(f"network window {net_cfg.window_length} != k={modem.k}")
    n_frames = tr_cfg.dataset_size // 2
    frames, symbols, _ = capture_frames(n_frames, modem, channel, tr_cfg, derive_seed(seed, 1), table)
    true_windows = table.symbol_to_c[symbols] - 1

    X, y = self_labels(frames, true_windows, modem, derive_seed(seed, 2))
    legit_params, _ = train(X, y, net_cfg, tr_cfg)
    legit = WindowClassifier.from_params(legit_params)

    if cfg.label_source == "genie":
        decided = true_windows
    elif cfg.bootstrap == "random":
        decided = derive_rng(seed, 3).integers(modem.M, size=n_frames)
    else:
        boot = WindowClassifier.from_params(init_params(net_cfg, derive_seed(seed, 4)))
        decided = demodulate(frames, boot, modem, table).windows
    label_acc = []
    eve = None
    for r in range(cfg.rounds):
        label_acc.append(float(np.mean(decided == true_windows)))
        # Round 0 shares the legitimate arm's pairing seed and training config,
        # so genie labels reproduce the legitimate receiver exactly.
        Xe, ye = self_labels(frames, decided, modem, derive_seed(seed, 2) if r == 0 else derive_seed(seed, 5, r))
        eve_params, _ = train(Xe, ye, net_cfg, tr_cfg)
        eve = WindowClassifier.from_params(eve_params)
        if cfg.label_source != "genie":
            decided = demodulate(frames, eve, modem, table).windows

    legit_ser, legit_ber = _evaluate_ber(legit, modem, channel, table, ebn0_grid, symbols_per_point, seed)
    eve_ser, eve_ber = _evaluate_ber(eve, modem, channel, table, ebn0_grid, symbols_per_point, seed)
    return EavesdropperResult(
        [float(e) for e in ebn0_grid], legit_ber, eve_ber, legit_ser, eve_ser,
        symbols_per_point * modem.bits_per_symbol, label_acc,
    )
