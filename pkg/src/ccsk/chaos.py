"""Logistic and Cubic (Chebyshev) chaotic sequence generation.

Both maps are iterated in float64 and share one vectorised step function, so a
scalar call and a batched call produce bit-identical orbits.

The cubic map is the Chebyshev polynomial ``T3(x) = 4x^3 - 3x``. The variant
``4x^3 + 3x`` is kept behind ``strict_paper=True`` only to show that it leaves
``(-1, 1)`` after a handful of steps.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .validation import ParameterError, check_count, make_rng

__all__ = [
    "MapKind",
    "MapDomainError",
    "StandardizationError",
    "Segment",
    "StandardizationConstants",
    "CUBIC_CONSTANTS",
    "LOGISTIC_CONSTANTS",
    "LOGISTIC_R",
    "default_constants",
    "map_step",
    "iterate",
    "draw_initial_state",
    "generate_segment",
    "standardize_segment",
    "destandardize_segment",
    "invariant_moments",
]

LOGISTIC_R = 3.7
DEFAULT_BURN_IN = 100

# Largest float64 strictly inside (-1, 1); cubic iterates are clipped to it
# because rounding of 4x^3 - 3x near |x| = 1 can land on +/-1 exactly.
_CUBIC_EDGE = math.nextafter(1.0, 0.0)
_EXCLUSION_RADIUS = 1e-6


class MapDomainError(ValueError):
    """A state handed to a map lies outside its valid open interval."""


class StandardizationError(RuntimeError):
    """Segment standardization applied twice or undone on a raw segment."""


class MapKind(enum.Enum):
    LOGISTIC = "logistic"
    CUBIC = "cubic"

    @property
    def interval(self) -> tuple[float, float]:
        if self is MapKind.LOGISTIC:
            return (0.0, 1.0)
        return (-1.0, 1.0)

    def contains(self, values) -> bool:
        lo, hi = self.interval
        v = np.asarray(values, dtype=np.float64)
        return bool(np.all((v > lo) & (v < hi)))


def _logistic(x):
    return LOGISTIC_R * x * (1.0 - x)


def _cubic(x):
    return np.clip(4.0 * x * x * x - 3.0 * x, -_CUBIC_EDGE, _CUBIC_EDGE)


def _cubic_printed(x):
    return 4.0 * x * x * x + 3.0 * x


def _step_fn(kind: MapKind, strict_paper: bool = False):
    if kind is MapKind.LOGISTIC:
        return _logistic
    return _cubic_printed if strict_paper else _cubic


def map_step(kind: MapKind, state: float, strict_paper: bool = False) -> float:
    """Advance one iteration of ``kind`` from ``state``.

    Raises :class:`MapDomainError` when ``state`` is outside the map's open
    interval. With ``strict_paper=True`` the cubic map uses ``4x^3 + 3x``; the
    input check still applies, the output is returned unchecked.
    """
    kind = MapKind(kind)
    state = float(state)
    if not math.isfinite(state) or not kind.contains(state):
        lo, hi = kind.interval
        raise MapDomainError(
            f"{kind.value} map state {state!r} outside ({lo:g}, {hi:g})"
        )
    return float(_step_fn(kind, strict_paper)(np.float64(state)))


def iterate(kind: MapKind, initial, n: int, burn_in: int = 0, strict_paper: bool = False) -> np.ndarray:
    """Iterate ``kind`` from one or many initial states.

    ``initial`` may be a scalar or a 1-D array of independent starting points.
    Returns an array of shape ``initial.shape + (n,)`` holding iterates
    ``burn_in + 1 .. burn_in + n``; the initial state itself is not included.
    """
    kind = MapKind(kind)
    step = _step_fn(kind, strict_paper)
    x = np.array(initial, dtype=np.float64)
    out = np.empty(x.shape + (n,), dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(burn_in):
            x = step(x)
        for i in range(n):
            x = step(x)
            out[..., i] = x
    return out


def _excluded_points(kind: MapKind) -> np.ndarray:
    if kind is MapKind.LOGISTIC:
        return np.array([0.0, 1.0, 1.0 - 1.0 / LOGISTIC_R, 0.5])
    # Periodic points of T3 with period <= 3 are cos(2 pi m / (3^p -/+ 1)).
    pts = [0.0, 0.5, -0.5, 1.0, -1.0, math.sqrt(3) / 2, -math.sqrt(3) / 2]
    for p in (1, 2, 3):
        for den in (3**p - 1, 3**p + 1):
            pts.extend(math.cos(2 * math.pi * m / den) for m in range(den + 1))
    return np.unique(np.array(pts))


_EXCLUDED = {kind: _excluded_points(kind) for kind in MapKind}


def draw_initial_state(kind: MapKind, rng: np.random.Generator, size=None):
    """Uniform draw from the valid interval, away from fixed and short-period points."""
    kind = MapKind(kind)
    lo, hi = kind.interval
    shape = () if size is None else (size,) if np.isscalar(size) else tuple(size)
    out = rng.uniform(lo, hi, size=shape)
    excluded = _EXCLUDED[kind]
    while True:
        bad = np.min(np.abs(np.asarray(out)[..., None] - excluded), axis=-1) < _EXCLUSION_RADIUS
        bad |= ~((np.asarray(out) > lo) & (np.asarray(out) < hi))
        if not np.any(bad):
            break
        if np.ndim(out) == 0:
            out = rng.uniform(lo, hi)
        else:
            out[bad] = rng.uniform(lo, hi, size=int(bad.sum()))
    return float(out) if size is None else out


@dataclass(frozen=True)
class StandardizationConstants:
    mean: float
    std: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.std) and self.std > 0):
            raise ParameterError(f"invalid standardization constants {self!r}")


# Chebyshev invariant density 1/(pi sqrt(1 - x^2)) has mean 0, variance 1/2.
CUBIC_CONSTANTS = StandardizationConstants(mean=0.0, std=math.sqrt(0.5))
# Long-run moments of the r = 3.7 logistic map: invariant_moments(LOGISTIC,
# 10**8, seed=20240601) over 1000 chains. Re-checked in tests/test_chaos.py.
LOGISTIC_CONSTANTS = StandardizationConstants(mean=0.6678219069, std=0.2033307609)


def default_constants(kind: MapKind) -> StandardizationConstants:
    return CUBIC_CONSTANTS if MapKind(kind) is MapKind.CUBIC else LOGISTIC_CONSTANTS


@dataclass(frozen=True, eq=False)
class Segment:
    """A run of consecutive iterates of one map.

    ``samples`` is a read-only float64 array.
    """

    kind: MapKind
    samples: np.ndarray
    standardized: bool = False
    constants: StandardizationConstants | None = field(default=None, compare=False)

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ParameterError("segment samples must be a non-empty 1-D sequence")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "kind", MapKind(self.kind))

    def __len__(self) -> int:
        return self.samples.size

    def __eq__(self, other):
        if not isinstance(other, Segment):
            return NotImplemented
        return (
            self.kind is other.kind
            and self.standardized == other.standardized
            and np.array_equal(self.samples, other.samples)
        )

    __hash__ = None


def generate_segment(
    kind: MapKind,
    length: int,
    seed=None,
    burn_in: int = DEFAULT_BURN_IN,
    initial: float | None = None,
) -> Segment:
    """Generate ``length`` iterates of ``kind`` after ``burn_in`` discarded steps.

    The starting state is drawn from ``seed`` unless ``initial`` is given.
    """
    kind = MapKind(kind)
    check_count("length", length, minimum=1)
    check_count("burn_in", burn_in, minimum=0)
    if initial is None:
        initial = draw_initial_state(kind, make_rng(seed))
    elif not kind.contains(initial):
        raise MapDomainError(f"initial state {initial!r} outside {kind.value} interval")
    return Segment(kind, iterate(kind, initial, length, burn_in))


def standardize_segment(seg: Segment, consts: StandardizationConstants | None = None) -> Segment:
    """Affine map ``(v - mean) / std`` using fixed per-map constants."""
    if seg.standardized:
        raise StandardizationError("segment is already standardized")
    consts = consts or default_constants(seg.kind)
    values = (seg.samples - consts.mean) / consts.std
    return Segment(seg.kind, values, standardized=True, constants=consts)


def destandardize_segment(seg: Segment) -> Segment:
    if not seg.standardized:
        raise StandardizationError("segment is not standardized")
    consts = seg.constants or default_constants(seg.kind)
    return Segment(seg.kind, seg.samples * consts.std + consts.mean)


def invariant_moments(
    kind: MapKind, n: int = 10**7, seed=None, burn_in: int = 1000, chains: int = 1000
) -> tuple[float, float]:
    """Long-run mean and standard deviation of the map's orbits.

    ``n`` iterates in total are split evenly over ``chains`` independent
    orbits, each started after ``burn_in`` discarded iterations.
    """
    kind = MapKind(kind)
    check_count("n", n, minimum=1)
    chains = max(1, min(chains, n))
    per_chain = -(-n // chains)
    x = draw_initial_state(kind, make_rng(seed), size=chains)
    step = _step_fn(kind)
    for _ in range(burn_in):
        x = step(x)
    total = 0.0
    total_sq = 0.0
    count = 0
    block = 1000
    buf = np.empty((chains, block))
    done = 0
    while done < per_chain:
        m = min(block, per_chain - done)
        for i in range(m):
            x = step(x)
            buf[:, i] = x
        chunk = buf[:, :m]
        total += float(chunk.sum())
        total_sq += float(np.square(chunk).sum())
        count += chunk.size
        done += m
    mean = total / count
    var = total_sq / count - mean * mean
    return mean, math.sqrt(max(var, 0.0))
