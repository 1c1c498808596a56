"""Monte Carlo SER/BER sweeps.

Every frame's randomness comes from ``derive_rng(master_seed, point, frame)``
and is consumed in a fixed order: bits, Cubic initial state, Logistic initial
state, path gains, noise. Frames are processed in fixed-size batches that can
run on a thread pool (``CCSK_THREADS``); per-batch error counts are summed,
so the totals do not depend on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..channel import (
    AWGN,
    RAYLEIGH2,
    ChannelConfig,
    apply_channel_batch,
    misaligned_windows,
    noise_params,
)
from ..modem import ModemConfig, SymbolMapTable, bits_to_symbols, frame_batch, symbols_to_bits
from ..receiver import ResidualDetector, demodulate
from ..validation import ParameterError, check_count, derive_rng
from .results import ResultRow

__all__ = [
    "ExperimentSpec",
    "CheckpointMissingError",
    "default_model_path",
    "resolve_detector",
    "worker_count",
    "simulate_point",
    "run_ser_sweep",
    "run_misalignment_sweep",
]

BATCH_FRAMES = 500


class CheckpointMissingError(FileNotFoundError):
    pass


def default_model_path(channel: str, k: int) -> str:
    return os.path.join("models", f"{channel}_k{k}.ccsk")


@dataclass(frozen=True)
class ExperimentSpec:
    detector: str = "residual"
    channel: str = AWGN
    M: int = 4
    k: int = 32
    beta: int | None = None
    ebn0_grid: tuple[float, ...] = (0.0, 10.0, 20.0)
    symbols_per_point: int = 10_000
    d: int = 0
    d_grid: tuple[int, ...] = ()
    master_seed: int = 0
    output: str | None = None
    model: str | None = None
    positions: tuple[int, ...] = ()

    def __post_init__(self):
        if self.detector not in ("nn", "residual"):
            raise ParameterError(f"detector must be 'nn' or 'residual', got {self.detector!r}")
        if self.channel not in (AWGN, RAYLEIGH2):
            raise ParameterError(f"channel must be 'awgn' or 'rayleigh2', got {self.channel!r}")
        modem = ModemConfig(self.M, self.k, self.beta)
        object.__setattr__(self, "beta", modem.beta)
        check_count("symbols_per_point", self.symbols_per_point, minimum=100)
        check_count("master_seed", self.master_seed, minimum=0)
        grid = tuple(float(e) for e in self.ebn0_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ParameterError("ebn0_grid must be non-empty and strictly increasing")
        object.__setattr__(self, "ebn0_grid", grid)
        for d in (self.d, *self.d_grid):
            check_count("d", d, minimum=0)
            if d >= self.k:
                raise ParameterError(f"misalignment d={d} must be < k={self.k}")
        object.__setattr__(self, "d_grid", tuple(int(d) for d in self.d_grid))
        SymbolMapTable(self.M, tuple(self.positions))

    @property
    def modem(self) -> ModemConfig:
        return ModemConfig(self.M, self.k, self.beta)

    @property
    def table(self) -> SymbolMapTable:
        return SymbolMapTable(self.M, tuple(self.positions))

    @property
    def channel_config(self) -> ChannelConfig:
        return ChannelConfig(self.channel)

    @property
    def model_path(self) -> str:
        return self.model or default_model_path(self.channel, self.k)


def resolve_detector(spec: ExperimentSpec, detector=None):
    """The detector object for ``spec``; loads the checkpoint for ``nn``."""
    if detector is not None:
        return detector
    if spec.detector == "residual":
        return ResidualDetector()
    from ..neural.estimator import WindowClassifier

    path = spec.model_path
    if not os.path.isfile(path):
        raise CheckpointMissingError(f"no neural checkpoint at {path!r}; run `ccsk train` first")
    clf = WindowClassifier.load(path)
    if clf.n_features_in_ != spec.k:
        raise ParameterError(f"checkpoint {path!r} is for windows of {clf.n_features_in_}, spec has k={spec.k}")
    return clf


def worker_count() -> int:
    raw = os.environ.get("CCSK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ParameterError(f"CCSK_THREADS must be an integer, got {raw!r}")


def _transmit(spec, ebn0, point, start, stop):
    """Received frames ``start..stop-1`` of one grid point plus their symbols and bits."""
    modem, table = spec.modem, spec.table
    rngs = [derive_rng(spec.master_seed, point, i) for i in range(start, stop)]
    n_bits = modem.bits_per_symbol
    bits = np.stack([r.integers(0, 2, size=n_bits) for r in rngs]) if rngs else np.empty((0, n_bits), np.int64)
    symbols = bits_to_symbols(bits.ravel(), modem.M)
    frames, _, _ = frame_batch(symbols, modem, table, rngs)
    rx = apply_channel_batch(frames, spec.channel_config, noise_params(ebn0, modem), rngs)
    return rx, symbols, bits.ravel()


def _batch_counts(spec, detector, ebn0, point, start, stop, d):
    if d == 0:
        rx, symbols, bits = _transmit(spec, ebn0, point, start, stop)
    else:
        rx, symbols, bits = _transmit(spec, ebn0, point, start, stop + 1)
        rx = misaligned_windows(rx.ravel(), spec.beta, d)
        n = stop - start
        symbols, bits = symbols[:n], bits[: n * spec.modem.bits_per_symbol]
    out = demodulate(rx, detector, spec.modem, spec.table)
    return int(np.sum(out.symbols != symbols)), int(np.sum(out.bits != bits))


def simulate_point(spec: ExperimentSpec, detector, ebn0: float, point: int, d: int = 0,
                   workers: int | None = None) -> tuple[int, int]:
    """Symbol and bit error counts over ``spec.symbols_per_point`` frames."""
    n = spec.symbols_per_point
    batches = [(s, min(s + BATCH_FRAMES, n)) for s in range(0, n, BATCH_FRAMES)]
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        counts = [_batch_counts(spec, detector, ebn0, point, a, b, d) for a, b in batches]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda ab: _batch_counts(spec, detector, ebn0, point, *ab, d), batches))
    return sum(c[0] for c in counts), sum(c[1] for c in counts)


def _detector_label(spec, detector):
    return spec.detector if detector is None else getattr(detector, "label", spec.detector)


def run_ser_sweep(spec: ExperimentSpec, detector=None, workers: int | None = None) -> list[ResultRow]:
    """One row per Eb/N0 grid point, in grid order."""
    det = resolve_detector(spec, detector)
    rows = []
    n = spec.symbols_per_point
    bits = n * spec.modem.bits_per_symbol
    for point, ebn0 in enumerate(spec.ebn0_grid):
        se, be = simulate_point(spec, det, ebn0, point, spec.d, workers)
        rows.append(ResultRow.from_counts(_detector_label(spec, detector), spec.channel, spec.M, spec.k,
                                          spec.beta, spec.d, ebn0, n, se, bits, be, spec.master_seed))
    return rows


def run_misalignment_sweep(spec: ExperimentSpec, detector=None, workers: int | None = None) -> list[ResultRow]:
    """One SER curve per ``d`` in ``spec.d_grid`` (or ``spec.d`` alone).

    All curves reuse the same transmitted frames at each grid point; only the
    receiver's window offset changes.
    """
    det = resolve_detector(spec, detector)
    rows = []
    for d in spec.d_grid or (spec.d,):
        rows.extend(run_ser_sweep(replace(spec, d=d, d_grid=()), det, workers))
    return rows
