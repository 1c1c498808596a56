"""Differential chaos shift keying baseline.

Each bit occupies ``2L`` samples: a standardized Logistic reference of length
``L`` followed by the reference multiplied by the bit (+1/-1). The receiver
correlates the two halves and decides on the sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..chaos import LOGISTIC_CONSTANTS, MapKind, draw_initial_state, iterate
from ..channel import ChannelConfig, NoiseParams, apply_channel_batch
from ..validation import check_count, derive_rng
from .results import ResultRow
from .sweeps import BATCH_FRAMES, ExperimentSpec

__all__ = ["DcskConfig", "dcsk_modulate", "dcsk_demodulate", "dcsk_baseline"]


@dataclass(frozen=True)
class DcskConfig:
    spreading_factor: int = 64

    def __post_init__(self):
        check_count("spreading_factor", self.spreading_factor, minimum=2)

    @property
    def frame_length(self) -> int:
        return 2 * self.spreading_factor


def dcsk_modulate(bits, cfg: DcskConfig, rngs) -> np.ndarray:
    """Frames ``(n, 2L)`` for bits in {0, 1}; bit 1 sends ``+x``, bit 0 ``-x``."""
    L = cfg.spreading_factor
    init = np.array([draw_initial_state(MapKind.LOGISTIC, r) for r in rngs])
    ref = (iterate(MapKind.LOGISTIC, init, L, burn_in=100) - LOGISTIC_CONSTANTS.mean) / LOGISTIC_CONSTANTS.std
    sign = 2.0 * np.asarray(bits, dtype=np.float64)[:, None] - 1.0
    return np.concatenate([ref, sign * ref], axis=1)


def dcsk_demodulate(received, cfg: DcskConfig) -> np.ndarray:
    L = cfg.spreading_factor
    r = np.atleast_2d(received)
    corr = np.sum(r[:, :L] * r[:, L:], axis=1)
    return (corr >= 0).astype(np.int64)


def _batch_errors(spec, cfg, ebn0, point, start, stop):
    rngs = [derive_rng(spec.master_seed, point, i) for i in range(start, stop)]
    bits = np.array([r.integers(0, 2) for r in rngs], dtype=np.int64)
    frames = dcsk_modulate(bits, cfg, rngs)
    eb = float(cfg.frame_length)
    rx = apply_channel_batch(frames, ChannelConfig(spec.channel), NoiseParams(eb, eb / 10.0 ** (ebn0 / 10.0)), rngs)
    return int(np.sum(dcsk_demodulate(rx, cfg) != bits))


def dcsk_baseline(spec: ExperimentSpec, dcsk: DcskConfig) -> list[ResultRow]:
    """BER of the DCSK correlator over ``spec``'s channel and Eb/N0 grid.

    ``spec.symbols_per_point`` bits are sent per point; unit-power frames give
    ``Eb = 2L``.
    """
    rows = []
    n = spec.symbols_per_point
    for point, ebn0 in enumerate(spec.ebn0_grid):
        errors = sum(
            _batch_errors(spec, dcsk, ebn0, point, s, min(s + BATCH_FRAMES, n))
            for s in range(0, n, BATCH_FRAMES)
        )
        rows.append(ResultRow.from_counts("dcsk-correlator", spec.channel, 2, dcsk.spreading_factor,
                                          dcsk.frame_length, 0, ebn0, n, errors, n, errors, spec.master_seed))
    return rows
