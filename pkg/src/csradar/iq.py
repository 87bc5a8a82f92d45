"""CSR1 binary IQ records.

Layout: 16-byte header (magic ``b"CSR1"``, then little-endian u32 ``n``,
``m`` and ``flags``) followed by ``m`` interleaved float64 ``(re, im)``
pairs.  ``n`` is the ambient block length, ``m`` the number of stored
complex samples.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError

MAGIC = b"CSR1"
_HEADER = struct.Struct("<4sIII")


class RecordFlag(enum.IntFlag):
    NONE = 0
    SUBSAMPLED = 0x1
    REGULAR_DECIMATION = 0x2
    FREQUENCY_DOMAIN = 0x4
    STACKED = 0x8


@dataclass(frozen=True, eq=False)
class IqRecord:
    data: np.ndarray
    n: int
    flags: RecordFlag = RecordFlag.NONE

    @property
    def m(self) -> int:
        return self.data.shape[0]


def encode_record(data: np.ndarray, n: int | None = None, flags: int = 0) -> bytes:
    data = np.asarray(data, dtype=np.complex128).reshape(-1)
    n = data.shape[0] if n is None else int(n)
    if not 0 <= n < 2**32 or data.shape[0] >= 2**32:
        raise FormatError("dimensions do not fit in u32")
    payload = np.empty(2 * data.shape[0], dtype="<f8")
    payload[0::2] = data.real
    payload[1::2] = data.imag
    return _HEADER.pack(MAGIC, n, data.shape[0], int(flags)) + payload.tobytes()


def decode_record(raw: bytes) -> IqRecord:
    if len(raw) < _HEADER.size:
        raise FormatError(f"record shorter than the {_HEADER.size}-byte header")
    magic, n, m, flags = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    expected = _HEADER.size + 16 * m
    if len(raw) != expected:
        raise FormatError(f"expected {expected} bytes for m={m}, got {len(raw)}")
    # Viewing the pairs as complex keeps signed zeros bit exact.
    data = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).astype(np.complex128)
    return IqRecord(data, int(n), RecordFlag(flags))


def write_record(path: str | Path, data: np.ndarray, n: int | None = None, flags: int = 0) -> Path:
    path = Path(path)
    path.write_bytes(encode_record(data, n, flags))
    return path


def read_record(path: str | Path) -> IqRecord:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return decode_record(raw)
