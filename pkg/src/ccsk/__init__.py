"""M-ary chaos shift keying over combined chaotic sequences.

The transmitter hides a Cubic-map information segment in one of ``M``
windows of a Logistic-map cover sequence; the receiver scores each window
and picks the most Cubic-looking one.
"""

from .channel import ChannelConfig, apply_channel, noise_params
from .chaos import MapKind, generate_segment, iterate
from .modem import ChaoticModulator, ModemConfig, SymbolMapTable, modulate
from .receiver import CCSKDemodulator, ResidualDetector, demodulate
from .security import leakage_rate
from .validation import ParameterError

__version__ = "0.1.0"

__all__ = [
    "CCSKDemodulator",
    "ChannelConfig",
    "ChaoticModulator",
    "MapKind",
    "ModemConfig",
    "ParameterError",
    "ResidualDetector",
    "SymbolMapTable",
    "apply_channel",
    "demodulate",
    "generate_segment",
    "iterate",
    "leakage_rate",
    "modulate",
    "noise_params",
]
