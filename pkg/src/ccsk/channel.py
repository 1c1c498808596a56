"""Multipath Rayleigh / AWGN channel with integer sample delays.

``r(q) = sum_g alpha_g * s(q - tau_g) + n(q)``, zero padding before the
frame start, one gain draw per path per frame, and Gaussian noise of variance
``N0 / 2`` per sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .modem import ModemConfig
from .validation import ParameterError, check_count, make_rng

__all__ = [
    "ChannelConfig",
    "NoiseParams",
    "noise_params",
    "noise_params_measured",
    "draw_path_gains",
    "apply_channel",
    "apply_channel_batch",
    "misaligned_windows",
    "apply_misalignment",
    "AWGN",
    "RAYLEIGH2",
]

AWGN = "awgn"
RAYLEIGH2 = "rayleigh2"


@dataclass(frozen=True)
class ChannelConfig:
    """Path profile of the channel.

    ``paths`` holds ``(avg_power_gain, delay)`` pairs. For ``kind="awgn"``
    the path gains are used as fixed amplitudes; for ``"rayleigh2"`` each
    frame draws Rayleigh amplitudes with ``E[alpha^2] = avg_power_gain``.
    """

    kind: str = AWGN
    paths: tuple[tuple[float, int], ...] = field(default=())

    def __post_init__(self):
        if self.kind not in (AWGN, RAYLEIGH2):
            raise ParameterError(f"unknown channel kind {self.kind!r}")
        paths = self.paths or (((1.0, 0),) if self.kind == AWGN else ((0.5, 0), (0.5, 2)))
        clean = []
        for gain, delay in paths:
            if not (math.isfinite(gain) and gain >= 0):
                raise ParameterError(f"path power gain must be finite and >= 0, got {gain}")
            clean.append((float(gain), check_count("delay", delay, minimum=0)))
        object.__setattr__(self, "paths", tuple(clean))

    @classmethod
    def awgn(cls) -> "ChannelConfig":
        return cls(AWGN)

    @classmethod
    def rayleigh2(cls) -> "ChannelConfig":
        return cls(RAYLEIGH2)

    @property
    def delays(self) -> np.ndarray:
        return np.array([d for _, d in self.paths], dtype=np.int64)

    @property
    def powers(self) -> np.ndarray:
        return np.array([g for g, _ in self.paths])


@dataclass(frozen=True)
class NoiseParams:
    Eb: float
    N0: float

    @property
    def sigma(self) -> float:
        return math.sqrt(self.N0 / 2.0)


def noise_params(ebn0_db: float, cfg: ModemConfig) -> NoiseParams:
    """Noise level for unit-power frames: ``Eb = beta / log2(M)``."""
    if not cfg.standardize:
        raise ParameterError(
            "noise_params assumes unit-power standardized frames; "
            "use noise_params_measured for raw-amplitude frames"
        )
    eb = cfg.beta / cfg.bits_per_symbol
    return NoiseParams(eb, eb / 10.0 ** (ebn0_db / 10.0))


def noise_params_measured(ebn0_db: float, frames, bits_per_symbol: int) -> NoiseParams:
    """Noise level from the measured mean frame energy."""
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    eb = float(np.mean(np.sum(frames**2, axis=1))) / bits_per_symbol
    return NoiseParams(eb, eb / 10.0 ** (ebn0_db / 10.0))


def draw_path_gains(cfg: ChannelConfig, seed=None, size=None) -> np.ndarray:
    """Per-path amplitudes for one frame (or ``size`` frames).

    Rayleigh amplitudes use scale ``sqrt(avg_power / 2)`` so that
    ``E[alpha^2] = avg_power``.
    """
    powers = cfg.powers
    if cfg.kind == AWGN:
        gains = np.sqrt(powers)
        return gains if size is None else np.broadcast_to(gains, (size, powers.size)).copy()
    rng = make_rng(seed)
    shape = powers.shape if size is None else (size, powers.size)
    return rng.rayleigh(scale=np.sqrt(powers / 2.0), size=shape)


def _multipath(samples: np.ndarray, gains: np.ndarray, delays: np.ndarray) -> np.ndarray:
    out = np.zeros_like(samples)
    beta = samples.shape[-1]
    for g, tau in enumerate(delays):
        if tau >= beta:
            raise ParameterError(f"path delay {tau} must be < frame length {beta}")
        out[..., tau:] += gains[..., g, None] * samples[..., : beta - tau]
    return out


def apply_channel(frame_samples, cfg: ChannelConfig, noise: NoiseParams | None, seed=None, gains=None) -> np.ndarray:
    """Pass one frame through the channel.

    Gains are drawn first, then the noise, both from ``seed``; pass ``gains``
    to reuse a fixed draw.
    """
    s = np.asarray(frame_samples, dtype=np.float64)
    rng = make_rng(seed)
    if gains is None:
        gains = draw_path_gains(cfg, rng)
    r = _multipath(s, np.asarray(gains, dtype=np.float64), cfg.delays)
    if noise is not None and noise.sigma > 0:
        r = r + rng.normal(0.0, noise.sigma, size=s.shape)
    return r


def apply_channel_batch(frames: np.ndarray, cfg: ChannelConfig, noise: NoiseParams | None, rngs) -> np.ndarray:
    """Apply the channel frame by frame, frame ``i`` drawing from ``rngs[i]``.

    Produces exactly what :func:`apply_channel` gives for each frame alone.
    """
    frames = np.asarray(frames, dtype=np.float64)
    n, beta = frames.shape
    if cfg.kind == AWGN:
        gains = draw_path_gains(cfg, size=n)
    else:
        gains = np.stack([draw_path_gains(cfg, r) for r in rngs]) if n else np.empty((0, len(cfg.paths)))
    out = _multipath(frames, gains, cfg.delays)
    if noise is not None and noise.sigma > 0:
        out += np.stack([r.normal(0.0, noise.sigma, size=beta) for r in rngs]) if n else 0.0
    return out


def misaligned_windows(stream, beta: int, d: int) -> np.ndarray:
    """Receiver frame views over a concatenated stream, offset by ``d`` samples.

    View ``i`` covers ``stream[i*beta + d : (i+1)*beta + d]``. With ``d > 0``
    the last frame has no successor and is dropped.
    """
    stream = np.asarray(stream, dtype=np.float64).ravel()
    check_count("d", d, minimum=0)
    if stream.size % beta:
        raise ParameterError(f"stream length {stream.size} is not a multiple of beta={beta}")
    n_frames = stream.size // beta
    if d == 0:
        return stream.reshape(n_frames, beta)
    if d >= beta:
        raise ParameterError(f"misalignment d={d} must be < beta={beta}")
    usable = n_frames - 1
    idx = np.arange(usable)[:, None] * beta + d + np.arange(beta)[None, :]
    return stream[idx]


def apply_misalignment(received_frames, d: int, k: int | None = None) -> np.ndarray:
    """Shift the receive grid of consecutive frames ``(n, beta)`` by ``d``.

    Returns ``(n - 1, beta)`` views when ``d > 0``; ``d`` must be below ``k``
    when ``k`` is given.
    """
    frames = np.atleast_2d(np.asarray(received_frames, dtype=np.float64))
    if k is not None and d >= k:
        raise ParameterError(f"misalignment d={d} must be < k={k}")
    if d > 0 and frames.shape[0] < 2:
        raise ParameterError("misalignment needs at least two consecutive frames")
    return misaligned_windows(frames.ravel(), frames.shape[1], d)
