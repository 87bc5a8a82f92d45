"""Waveforms, sampling patterns and the implicit measurement operator.

All dictionary columns inside a :class:`MeasurementOperator` have unit
l2 norm over the full-rate block: circulant blocks are scaled by
``1/sqrt(n)`` and the Fourier block uses the unitary DFT.  Raw ``+/-1``
values are kept at the waveform level.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    DimensionError,
    InvalidCompositionError,
    InvalidCyclicPrefixError,
    InvalidDimensionError,
    RangeError,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


# --------------------------------------------------------------------------
# waveforms
# --------------------------------------------------------------------------


def generate_rademacher(n: int, seed: int) -> np.ndarray:
    """Return an i.i.d. uniform ``+/-1`` sequence of length `n` as complex.

    The sequence is a pure function of ``(n, seed)``.
    """
    if int(n) < 2:
        raise InvalidDimensionError(f"waveform length must be >= 2, got {n}")
    rng = np.random.default_rng(int(seed))
    signs = rng.integers(0, 2, size=int(n)) * 2 - 1
    return signs.astype(np.complex128)


def add_cyclic_prefix(body: np.ndarray, cp_len: int) -> np.ndarray:
    """Prepend a copy of the last `cp_len` samples of `body`."""
    body = np.asarray(body)
    n = body.shape[0]
    if not 0 < cp_len < n:
        raise InvalidCyclicPrefixError(
            f"cyclic prefix length must satisfy 0 < cp_len < n={n}, got {cp_len}"
        )
    return np.concatenate([body[n - cp_len:], body])


def strip_cyclic_prefix(received: np.ndarray, cp_len: int, n: int) -> np.ndarray:
    """Drop the first `cp_len` samples and keep the next `n`."""
    received = np.asarray(received)
    if received.shape[0] < cp_len + n:
        raise DimensionError(
            f"received stream of length {received.shape[0]} is shorter than cp_len + n"
        )
    return received[cp_len:cp_len + n]


@dataclass(frozen=True, eq=False)
class WaveformFrame:
    """Periodic probe block plus its cyclic-prefix length."""

    body: np.ndarray
    cp_len: int
    seed: int | None = None

    def __post_init__(self) -> None:
        body = np.asarray(self.body, dtype=np.complex128)
        if body.ndim != 1 or body.shape[0] < 2:
            raise InvalidDimensionError("waveform body must be a vector of length >= 2")
        if not 0 < self.cp_len < body.shape[0]:
            raise InvalidCyclicPrefixError(
                f"cyclic prefix length must satisfy 0 < cp_len < n={body.shape[0]}"
            )
        object.__setattr__(self, "body", _frozen(body))

    @classmethod
    def rademacher(cls, n: int, cp_len: int, seed: int) -> "WaveformFrame":
        return cls(generate_rademacher(n, seed), cp_len, int(seed))

    @property
    def n(self) -> int:
        return self.body.shape[0]

    @property
    def framed(self) -> np.ndarray:
        """The transmitted samples ``[tail(body) | body]``."""
        return add_cyclic_prefix(self.body, self.cp_len)


# --------------------------------------------------------------------------
# elementary operators
# --------------------------------------------------------------------------


def circulant_convolve(body: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Cyclic convolution ``y[k] = sum_j h[j] body[(k - j) mod n]``.

    Either argument may be 2-D with the convolution taken along axis 0.
    """
    body = np.asarray(body)
    h = np.asarray(h)
    if body.shape[0] != h.shape[0]:
        raise DimensionError(
            f"circulant convolution needs equal lengths, got {body.shape[0]} and {h.shape[0]}"
        )
    fb = np.fft.fft(body, axis=0)
    fh = np.fft.fft(h, axis=0)
    if fh.ndim > fb.ndim:
        fb = fb.reshape(fb.shape + (1,) * (fh.ndim - fb.ndim))
    return np.fft.ifft(fb * fh, axis=0)


def circulant_correlate(body: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`circulant_convolve` with respect to the channel."""
    body = np.asarray(body)
    v = np.asarray(v)
    if body.shape[0] != v.shape[0]:
        raise DimensionError("circulant correlation needs equal lengths")
    fb = np.conj(np.fft.fft(body, axis=0))
    fv = np.fft.fft(v, axis=0)
    if fv.ndim > fb.ndim:
        fb = fb.reshape(fb.shape + (1,) * (fv.ndim - fb.ndim))
    return np.fft.ifft(fb * fv, axis=0)


def cyclic_shift(y: np.ndarray, n_d: int) -> np.ndarray:
    """Delay `y` cyclically: ``out[k] = y[(k - n_d) mod n]``."""
    y = np.asarray(y)
    n = y.shape[0]
    if not 0 <= n_d < n:
        raise RangeError(f"shift must lie in [0, {n}), got {n_d}")
    return np.roll(y, int(n_d), axis=0)


def unitary_dft(x: np.ndarray) -> np.ndarray:
    return np.fft.fft(x, axis=0, norm="ortho")


def unitary_idft(x: np.ndarray) -> np.ndarray:
    return np.fft.ifft(x, axis=0, norm="ortho")


# --------------------------------------------------------------------------
# sampling patterns
# --------------------------------------------------------------------------


class OmegaMode(str, enum.Enum):
    UNIFORM_RANDOM = "uniform-random"
    REGULAR_DECIMATION = "regular-decimation"


@dataclass(frozen=True, eq=False)
class SamplingPattern:
    """Index set selecting `m` of the `n` full-rate samples."""

    omega: np.ndarray
    n: int
    mode: OmegaMode = OmegaMode.UNIFORM_RANDOM
    seed: int | None = None

    def __post_init__(self) -> None:
        omega = np.asarray(self.omega, dtype=np.int64).reshape(-1)
        if omega.size and (omega[0] < 0 or omega[-1] >= self.n):
            raise DimensionError(f"sampling indices must lie in [0, {self.n})")
        if omega.size > 1 and np.any(np.diff(omega) <= 0):
            raise DimensionError("sampling indices must be strictly increasing")
        object.__setattr__(self, "omega", _frozen(omega))
        object.__setattr__(self, "mode", OmegaMode(self.mode))

    @property
    def m(self) -> int:
        return int(self.omega.shape[0])

    @classmethod
    def full(cls, n: int) -> "SamplingPattern":
        return cls(np.arange(n), n)

    @classmethod
    def uniform_random(cls, n: int, m: int, seed: int) -> "SamplingPattern":
        if not 0 <= m <= n:
            raise InvalidDimensionError(f"need 0 <= m <= n, got m={m}, n={n}")
        rng = np.random.default_rng(int(seed))
        omega = np.sort(rng.choice(n, size=m, replace=False))
        return cls(omega, n, OmegaMode.UNIFORM_RANDOM, int(seed))

    @classmethod
    def regular(cls, n: int, m: int) -> "SamplingPattern":
        """Decimate by ``k = n // m``: ``{0, k, 2k, ...}``."""
        if not 1 <= m <= n:
            raise InvalidDimensionError(f"need 1 <= m <= n, got m={m}, n={n}")
        k = n // m
        return cls(np.arange(m) * k, n, OmegaMode.REGULAR_DECIMATION)

    @classmethod
    def create(cls, n: int, m: int, mode: OmegaMode | str, seed: int = 0) -> "SamplingPattern":
        if OmegaMode(mode) is OmegaMode.REGULAR_DECIMATION:
            return cls.regular(n, m)
        return cls.uniform_random(n, m, seed)


def subsample(y: np.ndarray, pattern: SamplingPattern) -> np.ndarray:
    """Restrict `y` to the entries listed in ``pattern.omega``."""
    y = np.asarray(y)
    if y.shape[0] != pattern.n:
        raise DimensionError(f"vector length {y.shape[0]} does not match pattern n={pattern.n}")
    return y[pattern.omega]


def zero_fill(v: np.ndarray, pattern: SamplingPattern) -> np.ndarray:
    """Adjoint of :func:`subsample`."""
    v = np.asarray(v)
    if v.shape[0] != pattern.m:
        raise DimensionError(f"vector length {v.shape[0]} does not match pattern m={pattern.m}")
    out = np.zeros((pattern.n,) + v.shape[1:], dtype=np.complex128)
    out[pattern.omega] = v
    return out


def partial_fourier_adjoint(j_f: np.ndarray, pattern: SamplingPattern) -> np.ndarray:
    """Apply the restricted inverse DFT, ``R_omega F^H j_f`` (unitary)."""
    j_f = np.asarray(j_f)
    if j_f.shape[0] != pattern.n:
        raise DimensionError(f"spectrum length {j_f.shape[0]} does not match pattern n={pattern.n}")
    return subsample(unitary_idft(j_f), pattern)


# --------------------------------------------------------------------------
# composed operator
# --------------------------------------------------------------------------


class BlockKind(str, enum.Enum):
    CIRCULANT = "circulant"
    FOURIER = "conjugate-partial-fourier"


@dataclass(frozen=True, eq=False)
class MeasurementOperator:
    """``A = R_omega [C(x_1)/sqrt(n) ... C(x_T)/sqrt(n) | F^H]`` applied implicitly.

    Columns ``[i*n, (i+1)*n)`` belong to frame ``i``; when the NBI block is
    present it occupies the last `n` columns.
    """

    frames: tuple[WaveformFrame, ...]
    pattern: SamplingPattern
    include_nbi_block: bool = False
    _scale: float = field(init=False, repr=False, default=1.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(self.frames))
        object.__setattr__(self, "_scale", 1.0 / np.sqrt(self.n))

    @property
    def n(self) -> int:
        return self.pattern.n

    @property
    def blocks(self) -> tuple[BlockKind, ...]:
        kinds = [BlockKind.CIRCULANT] * len(self.frames)
        if self.include_nbi_block:
            kinds.append(BlockKind.FOURIER)
        return tuple(kinds)

    @property
    def channel_dim(self) -> int:
        return len(self.frames) * self.n

    @property
    def in_dim(self) -> int:
        return self.channel_dim + (self.n if self.include_nbi_block else 0)

    @property
    def out_dim(self) -> int:
        return self.pattern.m

    @property
    def shape(self) -> tuple[int, int]:
        return (self.out_dim, self.in_dim)

    def block_slice(self, index: int) -> slice:
        return slice(index * self.n, (index + 1) * self.n)

    @property
    def nbi_slice(self) -> slice:
        if not self.include_nbi_block:
            raise InvalidCompositionError("operator has no NBI block")
        return slice(self.channel_dim, self.in_dim)

    def split(self, s: np.ndarray) -> tuple[list[np.ndarray], np.ndarray | None]:
        """Split a coefficient vector into per-frame channels and the NBI block."""
        s = np.asarray(s)
        channels = [s[self.block_slice(i)] for i in range(len(self.frames))]
        nbi = s[self.nbi_slice] if self.include_nbi_block else None
        return channels, nbi

    def full_rate(self, s: np.ndarray) -> np.ndarray:
        """Noise-free full-rate received block before sub-sampling."""
        s = np.asarray(s)
        if s.shape[0] != self.in_dim:
            raise DimensionError(f"expected {self.in_dim} coefficients, got {s.shape[0]}")
        y = np.zeros((self.n,) + s.shape[1:], dtype=np.complex128)
        for i, frame in enumerate(self.frames):
            y += circulant_convolve(frame.body, s[self.block_slice(i)]) * self._scale
        if self.include_nbi_block:
            y += unitary_idft(s[self.nbi_slice])
        return y

    def forward(self, s: np.ndarray) -> np.ndarray:
        return subsample(self.full_rate(s), self.pattern)

    def adjoint(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[0] != self.out_dim:
            raise DimensionError(f"expected {self.out_dim} samples, got {v.shape[0]}")
        full = zero_fill(v, self.pattern)
        parts = [circulant_correlate(f.body, full) * self._scale for f in self.frames]
        if self.include_nbi_block:
            parts.append(unitary_dft(full))
        return np.concatenate(parts, axis=0)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense ``out_dim x in_dim`` equivalent, built once and read-only."""
        dense = self.forward(np.eye(self.in_dim, dtype=np.complex128))
        dense.setflags(write=False)
        return dense

    def channel_operator(self) -> "MeasurementOperator":
        """The same operator without the NBI block."""
        if not self.include_nbi_block:
            return self
        return MeasurementOperator(self.frames, self.pattern, False)


def compose_operator(
    frames: Sequence[WaveformFrame],
    include_nbi_block: bool,
    pattern: SamplingPattern,
) -> MeasurementOperator:
    """Stack partial circulant blocks, optionally followed by ``R_omega F^H``."""
    frames = tuple(frames)
    if not frames:
        raise InvalidCompositionError("at least one waveform frame is required")
    n = frames[0].n
    if any(f.n != n for f in frames):
        raise DimensionError("all frames must share the same block length")
    if pattern.n != n:
        raise DimensionError(f"pattern dimension {pattern.n} does not match block length {n}")
    return MeasurementOperator(frames, pattern, bool(include_nbi_block))
