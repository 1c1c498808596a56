"""Gray-coded M-ary mapping and combined chaotic frame construction.

A frame of ``beta`` samples is cut into ``M`` windows of ``beta // M``
samples. The symbol selects one window ``c`` (1-based); the first ``k``
samples of that window carry a Cubic segment and every other sample carries
the Logistic cover sequence, consumed in order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .chaos import (
    DEFAULT_BURN_IN,
    MapKind,
    Segment,
    draw_initial_state,
    iterate,
    default_constants,
)
from .validation import ParameterError, check_count, check_power_of_two, derive_rng

__all__ = [
    "ModemConfig",
    "SymbolMapTable",
    "Frame",
    "gray_encode",
    "gray_decode",
    "gray_map",
    "symbol_to_position",
    "combine_sequence",
    "bits_to_symbols",
    "symbols_to_bits",
    "modulate",
    "frame_batch",
    "ChaoticModulator",
]


@dataclass(frozen=True)
class ModemConfig:
    """Frame geometry.

    ``beta`` defaults to ``M * k``. Other values are allowed when ``beta`` is
    a multiple of both ``M`` and ``k`` and each window can hold ``k`` samples.
    """

    M: int
    k: int
    beta: int | None = None
    standardize: bool = True

    def __post_init__(self):
        check_power_of_two("M", self.M)
        check_count("k", self.k, minimum=2)
        beta = self.M * self.k if self.beta is None else check_count("beta", self.beta, minimum=2)
        object.__setattr__(self, "beta", beta)
        if beta % self.M or beta % self.k:
            raise ParameterError(f"beta={beta} must be divisible by M={self.M} and k={self.k}")
        if beta // self.M < self.k:
            raise ParameterError(f"window length beta/M={beta // self.M} is shorter than k={self.k}")

    @property
    def bits_per_symbol(self) -> int:
        return self.M.bit_length() - 1

    @property
    def window(self) -> int:
        return self.beta // self.M


def gray_encode(value):
    """Binary-reflected Gray code of an integer (or integer array)."""
    return value ^ (value >> 1)


def gray_decode(code):
    """Inverse of :func:`gray_encode`."""
    scalar = np.isscalar(code)
    value = np.array(code, dtype=np.int64, copy=True)
    shift = value >> 1
    while np.any(shift):
        value ^= shift
        shift >>= 1
    return int(value) if scalar else value


def _word_to_int(bits) -> int:
    out = 0
    for b in bits:
        if b not in (0, 1):
            raise ParameterError(f"bit values must be 0 or 1, got {b!r}")
        out = (out << 1) | int(b)
    return out


def _int_to_word(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def gray_map(word, M: int, direction: str = "encode"):
    """Map an n-bit word to its Gray symbol, or a symbol back to its word.

    >>> [gray_map(w, 4) for w in [(0, 0), (0, 1), (1, 1), (1, 0)]]
    [0, 1, 2, 3]
    >>> gray_map(4, 8, "decode")
    (1, 1, 0)
    """
    width = check_power_of_two("M", M).bit_length() - 1
    if direction == "encode":
        word = tuple(int(b) for b in word)
        if len(word) != width:
            raise ParameterError(f"expected {width}-bit word for M={M}, got {len(word)} bits")
        return gray_decode(_word_to_int(word))
    if direction == "decode":
        symbol = int(word)
        if not 0 <= symbol < M:
            raise ParameterError(f"symbol {symbol} out of range for M={M}")
        return _int_to_word(gray_encode(symbol), width)
    raise ParameterError(f"direction must be 'encode' or 'decode', got {direction!r}")


@dataclass(frozen=True)
class SymbolMapTable:
    """Symbol to window position table shared by transmitter and receiver.

    ``positions[s]`` is the 1-based window index carrying symbol ``s``.
    """

    M: int
    positions: tuple[int, ...] = field(default=())

    def __post_init__(self):
        check_power_of_two("M", self.M)
        positions = tuple(int(p) for p in self.positions) or tuple(range(1, self.M + 1))
        if sorted(positions) != list(range(1, self.M + 1)):
            raise ParameterError(f"positions must be a permutation of 1..{self.M}")
        object.__setattr__(self, "positions", positions)

    @classmethod
    def identity(cls, M: int) -> "SymbolMapTable":
        return cls(M)

    @classmethod
    def random(cls, M: int, seed=None) -> "SymbolMapTable":
        perm = np.random.default_rng(seed).permutation(M) + 1
        return cls(M, tuple(int(p) for p in perm))

    @property
    def symbol_to_c(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=np.int64)

    @property
    def c_to_symbol(self) -> np.ndarray:
        inv = np.empty(self.M, dtype=np.int64)
        inv[self.symbol_to_c - 1] = np.arange(self.M)
        return inv

    def bit_to_symbol(self, word) -> int:
        return gray_map(word, self.M, "encode")


def symbol_to_position(symbol: int, table: SymbolMapTable) -> int:
    if not 0 <= int(symbol) < table.M:
        raise ParameterError(f"symbol {symbol} out of range for M={table.M}")
    return table.positions[int(symbol)]


@dataclass(frozen=True, eq=False)
class Frame:
    samples: np.ndarray
    symbol: int
    c: int
    info_segment: Segment
    cover_segment: Segment

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size


def _info_slice(c: int, cfg: ModemConfig) -> slice:
    start = (c - 1) * cfg.window
    return slice(start, start + cfg.k)


def combine_sequence(info: Segment, cover: Segment, c: int, cfg: ModemConfig, symbol: int | None = None) -> Frame:
    """Place ``info`` at window ``c`` and fill the rest of the frame with ``cover``."""
    if len(info) != cfg.k:
        raise ParameterError(f"info segment has {len(info)} samples, expected k={cfg.k}")
    if len(cover) != cfg.beta - cfg.k:
        raise ParameterError(f"cover segment has {len(cover)} samples, expected {cfg.beta - cfg.k}")
    if not 1 <= int(c) <= cfg.M:
        raise ParameterError(f"position c={c} out of range 1..{cfg.M}")
    samples = np.empty(cfg.beta)
    mask = np.ones(cfg.beta, dtype=bool)
    mask[_info_slice(c, cfg)] = False
    samples[~mask] = info.samples
    samples[mask] = cover.samples
    return Frame(samples, int(c) - 1 if symbol is None else int(symbol), int(c), info, cover)


def bits_to_symbols(bits, M: int) -> np.ndarray:
    """Group a bit stream into Gray-coded symbols (MSB first)."""
    width = check_power_of_two("M", M).bit_length() - 1
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % width:
        raise ParameterError(f"{bits.size} bits is not a multiple of log2(M)={width}")
    if np.any((bits != 0) & (bits != 1)):
        raise ParameterError("bit stream must contain only 0 and 1")
    words = bits.reshape(-1, width)
    weights = 1 << np.arange(width - 1, -1, -1)
    return gray_decode(words @ weights)


def symbols_to_bits(symbols, M: int) -> np.ndarray:
    width = check_power_of_two("M", M).bit_length() - 1
    codes = gray_encode(np.asarray(symbols, dtype=np.int64).ravel())
    shifts = np.arange(width - 1, -1, -1)
    return ((codes[:, None] >> shifts) & 1).astype(np.int8).ravel()


def _frame_segments(cfg: ModemConfig, rngs, burn_in: int):
    info_init = np.array([draw_initial_state(MapKind.CUBIC, r) for r in rngs])
    cover_init = np.array([draw_initial_state(MapKind.LOGISTIC, r) for r in rngs])
    info = iterate(MapKind.CUBIC, info_init, cfg.k, burn_in)
    cover = iterate(MapKind.LOGISTIC, cover_init, cfg.beta - cfg.k, burn_in)
    if cfg.standardize:
        ci, cl = default_constants(MapKind.CUBIC), default_constants(MapKind.LOGISTIC)
        info = (info - ci.mean) / ci.std
        cover = (cover - cl.mean) / cl.std
    return info, cover


def frame_batch(symbols, cfg: ModemConfig, table: SymbolMapTable, rngs, burn_in: int = DEFAULT_BURN_IN):
    """Vectorised frame construction.

    Returns ``(samples, info, cover)`` arrays of shapes ``(n, beta)``,
    ``(n, k)`` and ``(n, beta - k)``. Frame ``i`` draws its two initial
    states, in that order, from ``rngs[i]``.
    """
    symbols = np.asarray(symbols, dtype=np.int64)
    info, cover = _frame_segments(cfg, rngs, burn_in)
    n = symbols.size
    cs = table.symbol_to_c[symbols]
    starts = (cs - 1) * cfg.window
    cols = np.arange(cfg.beta)
    in_info = (cols[None, :] >= starts[:, None]) & (cols[None, :] < starts[:, None] + cfg.k)
    samples = np.empty((n, cfg.beta))
    samples[in_info] = info.ravel()
    samples[~in_info] = cover.ravel()
    return samples, info, cover


def modulate(bits, cfg: ModemConfig, table: SymbolMapTable | None = None, seed=0, burn_in: int = DEFAULT_BURN_IN) -> list[Frame]:
    """Turn a bit stream into one frame per ``log2(M)`` bits.

    Frame ``i`` draws its chaotic segments from ``derive_rng(seed, i)``.
    """
    table = table or SymbolMapTable.identity(cfg.M)
    if table.M != cfg.M:
        raise ParameterError(f"table is for M={table.M}, config has M={cfg.M}")
    symbols = bits_to_symbols(bits, cfg.M)
    rngs = [derive_rng(seed, i) for i in range(symbols.size)]
    samples, info, cover = frame_batch(symbols, cfg, table, rngs, burn_in)
    std = cfg.standardize
    frames = []
    for i, s in enumerate(symbols):
        frames.append(
            Frame(
                samples[i],
                int(s),
                table.positions[s],
                Segment(MapKind.CUBIC, info[i], standardized=std),
                Segment(MapKind.LOGISTIC, cover[i], standardized=std),
            )
        )
    return frames


class ChaoticModulator(TransformerMixin, BaseEstimator):
    """Transformer from bit streams to stacked frame samples.

    Parameters
    ----------
    M, k, beta : int
        Frame geometry, see :class:`ModemConfig`.
    positions : tuple of int or None
        Symbol to window table; identity order when None.
    seed : int
        Master seed for the per-frame chaotic segments.
    """

    def __init__(self, M=4, k=32, beta=None, positions=None, standardize=True, seed=0):
        self.M = M
        self.k = k
        self.beta = beta
        self.positions = positions
        self.standardize = standardize
        self.seed = seed

    def fit(self, X=None, y=None):
        self.config_ = ModemConfig(self.M, self.k, self.beta, self.standardize)
        self.table_ = SymbolMapTable(self.M, tuple(self.positions or ()))
        return self

    def transform(self, X):
        frames = modulate(X, self.config_, self.table_, self.seed)
        self.symbols_ = np.array([f.symbol for f in frames], dtype=np.int64)
        return np.stack([f.samples for f in frames]) if frames else np.empty((0, self.config_.beta))
