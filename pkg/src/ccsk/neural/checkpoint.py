"""Binary checkpoint format.

Layout (all integers little-endian)::

    b"CCSK" | u32 version | u32 len | config JSON (utf-8)
    u32 n_tensors
    per tensor: u16 name_len | name | u8 ndim | u32 dims... | f64 values (row-major)
    u64 checksum

The checksum is the first 8 bytes of the SHA-256 digest of everything before
it, read as a little-endian u64. The config JSON includes its fingerprint,
which must match the fingerprint recomputed from the stored config.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile

import numpy as np

from .config import NetConfig
from .network import NetParams

MAGIC = b"CCSK"
VERSION = 1

__all__ = ["CheckpointFormatError", "save_params", "load_params", "dumps", "loads"]


class CheckpointFormatError(ValueError):
    pass


def _checksum(blob: bytes) -> int:
    return struct.unpack("<Q", hashlib.sha256(blob).digest()[:8])[0]


def dumps(params: NetParams) -> bytes:
    cfg = params.config.to_dict()
    cfg["fingerprint"] = params.fingerprint
    meta = json.dumps(cfg, sort_keys=True).encode()
    parts = [MAGIC, struct.pack("<II", VERSION, len(meta)), meta]
    names = params.names()
    parts.append(struct.pack("<I", len(names)))
    for name in names:
        arr = np.ascontiguousarray(params[name], dtype="<f8")
        raw = name.encode()
        parts.append(struct.pack("<HB", len(raw), arr.ndim) + raw)
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.tobytes())
    blob = b"".join(parts)
    return blob + struct.pack("<Q", _checksum(blob))


class _Reader:
    def __init__(self, blob):
        self.blob = blob
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.blob):
            raise CheckpointFormatError("truncated checkpoint")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def loads(blob: bytes, expected: NetConfig | None = None) -> NetParams:
    if len(blob) < 8 or blob[:4] != MAGIC:
        raise CheckpointFormatError("not a CCSK checkpoint (bad magic)")
    body, tail = blob[:-8], blob[-8:]
    if struct.unpack("<Q", tail)[0] != _checksum(body):
        raise CheckpointFormatError("checksum mismatch (corrupt or truncated file)")
    rd = _Reader(body)
    rd.take(4)
    version, meta_len = rd.unpack("<II")
    if version != VERSION:
        raise CheckpointFormatError(f"unsupported checkpoint version {version}")
    try:
        meta = json.loads(rd.take(meta_len).decode())
        stored_fp = meta.pop("fingerprint")
        cfg = NetConfig.from_dict(meta)
    except (ValueError, KeyError, TypeError) as exc:
        raise CheckpointFormatError(f"bad config header: {exc}") from exc
    if cfg.fingerprint() != stored_fp:
        raise CheckpointFormatError("config fingerprint does not match stored config")
    if expected is not None and expected.fingerprint() != stored_fp:
        raise CheckpointFormatError(
            f"checkpoint was saved for config {stored_fp}, expected {expected.fingerprint()}"
        )
    (count,) = rd.unpack("<I")
    tensors = {}
    for _ in range(count):
        name_len, ndim = rd.unpack("<HB")
        name = rd.take(name_len).decode()
        shape = rd.unpack(f"<{ndim}I")
        n = int(np.prod(shape, dtype=np.int64))
        tensors[name] = np.frombuffer(rd.take(8 * n), dtype="<f8").reshape(shape).astype(np.float64)
    if rd.pos != len(body):
        raise CheckpointFormatError("trailing bytes after tensor records")
    try:
        return NetParams(cfg, tensors)
    except ValueError as exc:
        raise CheckpointFormatError(str(exc)) from exc


def save_params(params: NetParams, path) -> None:
    """Write atomically: a temp file in the target directory is renamed into place."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(dumps(params))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_params(path, expected: NetConfig | None = None) -> NetParams:
    with open(path, "rb") as fh:
        return loads(fh.read(), expected)
