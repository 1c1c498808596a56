"""Multiply-accumulate count estimate for the window classifier.

Terms, with ``Nh`` the bidirectional feature width (2 * hidden units), ``T``
the window length, ``D`` the attention dimension and ``C`` the class count:

* recurrent layer l: ``(N_in_l * Nh + Nh^2) * T``; ``N_in`` is the input
  channel count for layer 1 and ``D`` for layer 2
* attention scores: ``D * T^2``
* attention value mixing: ``D * T``
* dense head: ``Nh * C``
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import NetConfig


@dataclass(frozen=True)
class ComplexityEstimate:
    terms: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.terms.values())

    def as_rows(self) -> list[tuple[str, int]]:
        return list(self.terms.items()) + [("total", self.total)]


def estimate_complexity(cfg: NetConfig) -> ComplexityEstimate:
    nh = 2 * cfg.hidden_units
    T = cfg.window_length
    D = cfg.attention_dim
    terms = {
        "recurrent_1": (cfg.input_channels * nh + nh * nh) * T,
        "recurrent_2": (D * nh + nh * nh) * T,
        "attention_scores": D * T * T,
        "attention_values": D * T,
        "dense": nh * cfg.classes,
    }
    return ComplexityEstimate(terms)
