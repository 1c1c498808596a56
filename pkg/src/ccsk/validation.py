"""Input validation and seeding helpers shared across the package."""

from __future__ import annotations

import numbers

import numpy as np

__all__ = [
    "ParameterError",
    "check_count",
    "check_power_of_two",
    "check_windows",
    "make_rng",
    "derive_seed",
    "derive_rng",
]


class ParameterError(ValueError):
    """Raised for invalid configuration or argument values."""


def check_count(name: str, value, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_power_of_two(name: str, value) -> int:
    value = check_count(name, value, minimum=2)
    if value & (value - 1):
        raise ParameterError(f"{name} must be a power of 2, got {value}")
    return value


def check_windows(X, length: int | None = None, name: str = "X") -> np.ndarray:
    """Coerce ``X`` to a finite float64 array of shape (n_windows, length).

    A single 1-D window is promoted to shape (1, length).
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] == 0:
        raise ParameterError(f"{name} must be 2-D (n_windows, window_length), got shape {arr.shape}")
    if length is not None and arr.shape[1] != length:
        raise ParameterError(f"{name} windows have length {arr.shape[1]}, expected {length}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite values")
    return arr


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _flatten_keys(keys):
    for k in keys:
        if isinstance(k, np.random.SeedSequence):
            ent = k.entropy
            yield from (ent if isinstance(ent, (list, tuple, np.ndarray)) else [ent])
            yield from k.spawn_key
        else:
            k = int(k)
            if k < 0:
                raise ParameterError(f"seed keys must be non-negative, got {k}")
            yield k


def derive_seed(*keys) -> np.random.SeedSequence:
    """Seed sequence fixed by an ordered tuple of non-negative integer keys.

    Used as ``derive_seed(master, point_index, frame_index)`` so that every
    frame's randomness is independent of evaluation order. A key may itself
    be a derived seed, whose entropy and spawn key are then mixed in. The key count
    is mixed in as well: SeedSequence zero-pads its entropy, so ``(s, 1)``
    and ``(s, 1, 0)`` would otherwise collide.
    """
    flat = [int(k) for k in _flatten_keys(keys)]
    return np.random.SeedSequence([len(flat), *flat])


def derive_rng(*keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*keys))
