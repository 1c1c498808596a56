"""Result rows, Wilson intervals and CSV persistence."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import astuple, dataclass, fields

from ..validation import ParameterError

__all__ = ["ResultRow", "Z95", "wilson_interval", "ser_ci", "emit_results", "read_results", "CSV_FIELDS"]

Z95 = 1.959963984540054


def wilson_interval(errors: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0:
        raise ParameterError("interval needs at least one trial")
    p = errors / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == n else min(1.0, centre + half)
    return lo, hi


def ser_ci(errors: int, n: int) -> float:
    """95% Wilson half-width; with no observed errors, the rule-of-three bound ``3/n``."""
    if errors == 0:
        return 3.0 / n
    lo, hi = wilson_interval(errors, n)
    return (hi - lo) / 2.0


@dataclass(frozen=True)
class ResultRow:
    detector: str
    channel: str
    M: int
    k: int
    beta: int
    d: int
    ebn0_db: float
    symbols: int
    symbol_errors: int
    ser: float
    bit_errors: int
    ber: float
    seed: int
    ser_ci: float

    @classmethod
    def from_counts(cls, detector, channel, M, k, beta, d, ebn0_db, symbols, symbol_errors,
                    bits, bit_errors, seed) -> "ResultRow":
        return cls(detector, channel, int(M), int(k), int(beta), int(d), float(ebn0_db),
                   int(symbols), int(symbol_errors), symbol_errors / symbols,
                   int(bit_errors), bit_errors / bits, int(seed), ser_ci(symbol_errors, symbols))

    @property
    def ser_interval(self) -> tuple[float, float]:
        if self.symbol_errors == 0:
            return 0.0, self.ser_ci
        return wilson_interval(self.symbol_errors, self.symbols)


CSV_FIELDS = [f.name for f in fields(ResultRow)]
_TYPES = {f.name: f.type for f in fields(ResultRow)}


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(rows, path, append: bool = False) -> None:
    """Write rows as CSV: header, then one line per row in field order.

    Overwrites go through a temporary file in the target directory, so an
    unwritable destination leaves nothing behind. ``append=True`` adds rows
    to an existing file (writing the header first if the file is new).
    """
    path = os.fspath(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    exists = append and os.path.exists(path) and os.path.getsize(path) > 0
    if not exists:
        writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow([_fmt(v) for v in astuple(row)])
    text = buf.getvalue()
    if append:
        with open(path, "a", newline="") as fh:
            fh.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_results(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_FIELDS:
            raise ParameterError(f"unexpected CSV header {reader.fieldnames}")
        rows = []
        for rec in reader:
            vals = {}
            for name, raw in rec.items():
                t = _TYPES[name]
                vals[name] = int(raw) if t in (int, "int") else float(raw) if t in (float, "float") else raw
            rows.append(ResultRow(**vals))
    return rows
