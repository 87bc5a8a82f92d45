"""Synthetic multipath scenes, tap sampling and additive noise."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path as FilePath
from typing import Iterable, Sequence

import numpy as np

from .errors import CsRadarError, InvalidPowerError, SceneInvalidError

# 500 MHz waveform sampled at the Nyquist rate.
NYQUIST_SAMPLE_PERIOD_NS = 2.0


@dataclass(frozen=True)
class PathComponent:
    alpha: complex
    tau: float


@dataclass(frozen=True)
class Scene:
    """A handful of propagation paths whose delays fit inside the prefix.

    Delays are in full-rate samples. ``0 <= tau < cp_len`` is enforced so
    the cyclic model of the received block is exact.
    """

    paths: tuple[PathComponent, ...]
    n: int
    cp_len: int

    def __post_init__(self) -> None:
        paths = tuple(
            p if isinstance(p, PathComponent) else PathComponent(complex(p[0]), float(p[1]))
            for p in self.paths
        )
        object.__setattr__(self, "paths", paths)
        if not 0 < self.cp_len < self.n:
            raise SceneInvalidError(f"cp_len must satisfy 0 < cp_len < n, got {self.cp_len}")
        for p in paths:
            if not (math.isfinite(p.tau) and 0 <= p.tau < self.cp_len):
                raise SceneInvalidError(
                    f"path delay {p.tau} outside [0, cp_len={self.cp_len})"
                )

    @property
    def targets(self) -> int:
        return len(self.paths)

    @property
    def max_delay(self) -> float:
        return max((p.tau for p in self.paths), default=0.0)

    def shifted(self, d: float) -> "Scene":
        return Scene(tuple(PathComponent(p.alpha, p.tau + d) for p in self.paths), self.n, self.cp_len)


@dataclass(frozen=True, eq=False)
class SparseChannel:
    taps: np.ndarray
    true_support: tuple[int, ...]


def random_scene(
    rng: np.random.Generator,
    n: int,
    cp_len: int,
    targets: int,
    fractional: bool = False,
) -> Scene:
    """Draw `targets` paths with distinct delays, unit magnitude, uniform phase."""
    if targets > cp_len:
        raise SceneInvalidError(f"cannot place {targets} distinct delays inside cp_len={cp_len}")
    delays = rng.choice(cp_len, size=targets, replace=False).astype(float)
    if fractional:
        delays = np.minimum(delays + rng.random(targets), cp_len - 1e-9)
    phases = rng.random(targets)
    paths = tuple(
        PathComponent(complex(np.exp(2j * np.pi * ph)), float(d)) for ph, d in zip(phases, delays)
    )
    return Scene(paths, n, cp_len)


def _dirichlet_taps(alpha: complex, tau: float, n: int) -> np.ndarray:
    # Band-limited delayed impulse: h_k = alpha/n * sum_f exp(j 2 pi f (k - tau) / n).
    d = np.arange(n) - tau
    phase = np.exp(1j * np.pi * (n - 1) * d / n)
    den = n * np.sin(np.pi * d / n)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sin(np.pi * d) / den
    ratio = np.where(np.abs(den) < 1e-12, 1.0, ratio)
    return alpha * phase * ratio


def sample_channel(scene: Scene) -> SparseChannel:
    """Sample the tap vector of `scene`.

    Integer delays land on a single tap. Fractional delays spread their
    energy with the periodic-sinc kernel, so ``||h|| = |alpha|`` still holds
    for a lone path.
    """
    taps = np.zeros(scene.n, dtype=np.complex128)
    support = []
    for p in scene.paths:
        if float(p.tau).is_integer():
            taps[int(p.tau)] += p.alpha
        else:
            taps += _dirichlet_taps(p.alpha, p.tau, scene.n)
        support.append(int(np.floor(p.tau + 0.5)) % scene.n)
    return SparseChannel(taps, tuple(support))


def add_awgn(
    y: np.ndarray,
    snr_db: float,
    signal_power: float,
    seed: int | np.random.Generator,
) -> np.ndarray:
    """Add circular complex Gaussian noise at the requested SNR.

    ``snr_db = inf`` returns `y` unchanged.
    """
    if not signal_power > 0:
        raise InvalidPowerError(f"signal power must be positive, got {signal_power}")
    y = np.asarray(y, dtype=np.complex128)
    if math.isinf(snr_db) and snr_db > 0:
        return y.copy()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sigma_sq = noise_variance(snr_db, signal_power)
    noise = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
    return y + np.sqrt(sigma_sq / 2.0) * noise


def noise_variance(snr_db: float, signal_power: float) -> float:
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return signal_power / 10.0 ** (snr_db / 10.0)


def toa_from_support(
    support: Iterable[int], sample_period_ns: float = NYQUIST_SAMPLE_PERIOD_NS
) -> list[float]:
    """Convert tap indices to delays in nanoseconds."""
    return [int(k) * sample_period_ns for k in support]


def linear_receive(framed: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Linear convolution of a CP-framed transmission with a channel."""
    return np.convolve(np.asarray(framed), np.asarray(h))


# --------------------------------------------------------------------------
# scene files
# --------------------------------------------------------------------------


def parse_scene_text(text: str, n: int, cp_len: int) -> Scene:
    """Parse ``path = <re>,<im>,<tau>`` lines; ``#`` starts a comment."""
    paths: list[PathComponent] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise SceneInvalidError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        if key != "path":
            raise SceneInvalidError(f"line {lineno}: unknown key {key!r}")
        try:
            re_s, im_s, tau_s = (float(v) for v in value.split(","))
        except ValueError as exc:
            raise SceneInvalidError(f"line {lineno}: expected '<re>,<im>,<tau>'") from exc
        paths.append(PathComponent(complex(re_s, im_s), tau_s))
    return Scene(tuple(paths), n, cp_len)


def load_scene(path: str | FilePath, n: int, cp_len: int) -> Scene:
    try:
        text = FilePath(path).read_text()
    except OSError as exc:
        raise CsRadarError(f"cannot read scene file {path}: {exc}") from exc
    return parse_scene_text(text, n, cp_len)


def format_scene(scene: Scene) -> str:
    return "".join(
        f"path = {p.alpha.real!r},{p.alpha.imag!r},{p.tau!r}\n" for p in scene.paths
    )


def scenes_from_paths(
    paths: Sequence[tuple[complex, float]], n: int, cp_len: int
) -> Scene:
    return Scene(tuple(PathComponent(complex(a), float(t)) for a, t in paths), n, cp_len)
