"""2x2 MIMO simulation, per-antenna recovery and tap detection."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .channel import NYQUIST_SAMPLE_PERIOD_NS, Scene, add_awgn, noise_variance, sample_channel
from .errors import DimensionError, InvalidKError, SceneInvalidError
from .nbi import NbiSignal, TwoStageResult, cached_operator, synthesize_nbi, two_stage_recover
from .signal import OmegaMode, SamplingPattern, WaveformFrame
from .solver import BpdnProblem, BpdnSolution, epsilon_from_noise, solve_bpdn


class Mode(str, enum.Enum):
    PLAIN = "plain"
    JOINT = "joint"
    TWO_STAGE = "two-stage"


def _subseed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


@dataclass(frozen=True, eq=False)
class MimoConfig:
    """Static radar parameters; everything that does not change per trial."""

    n: int = 128
    cp_len: int = 32
    m: int = 43
    tx_count: int = 2
    rx_count: int = 2
    waveform_seed: int = 1
    omega_seed: int = 2
    omega_mode: OmegaMode = OmegaMode.UNIFORM_RANDOM
    snr_db: float = 20.0
    sir_db: float = math.inf
    targets: int = 1
    nbi_tones: int = 0
    nbi_bins: tuple[int, ...] | None = None
    tolerance_taps: int = 1
    sample_period_ns: float = NYQUIST_SAMPLE_PERIOD_NS

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega_mode", OmegaMode(self.omega_mode))
        if not 0 <= self.m <= self.n:
            raise DimensionError(f"need m <= n, got m={self.m}, n={self.n}")
        if not 0 < self.cp_len < self.n:
            raise SceneInvalidError(f"cp_len must satisfy 0 < cp_len < n, got {self.cp_len}")

    @cached_property
    def frames(self) -> tuple[WaveformFrame, ...]:
        return tuple(
            WaveformFrame.rademacher(self.n, self.cp_len, _subseed(self.waveform_seed, i))
            for i in range(self.tx_count)
        )

    @cached_property
    def pattern(self) -> SamplingPattern:
        return SamplingPattern.create(self.n, self.m, self.omega_mode, self.omega_seed)

    def operator(self, include_nbi: bool):
        return cached_operator(self.frames, include_nbi, self.pattern)

    def replace(self, **changes) -> "MimoConfig":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        out = MimoConfig(**fields)
        # Reuse the waveform and sampling pattern when they cannot differ.
        if all(getattr(out, k) == getattr(self, k) for k in ("n", "cp_len", "tx_count", "waveform_seed")):
            if "frames" in self.__dict__:
                out.__dict__["frames"] = self.frames
        if all(getattr(out, k) == getattr(self, k) for k in ("n", "m", "omega_mode", "omega_seed")):
            if "pattern" in self.__dict__:
                out.__dict__["pattern"] = self.pattern
        return out


@dataclass(frozen=True, eq=False)
class ReceivedBlock:
    """Sub-sampled observations of every receive antenna plus bookkeeping."""

    observations: tuple[np.ndarray, ...]
    signal_power: tuple[float, ...]
    noise_variance: tuple[float, ...]
    nbi_power: tuple[float, ...]
    full_rate: tuple[np.ndarray, ...] | None = field(default=None, repr=False)


def simulate_receive(
    config: MimoConfig,
    scenes: Sequence[Sequence[Scene]],
    nbi: Sequence[NbiSignal | None] | None = None,
    noise_seeds: Sequence[int | np.random.Generator] | None = None,
    keep_full_rate: bool = False,
    tones: Sequence[Sequence[tuple[int, float | None, float]]] | None = None,
) -> ReceivedBlock:
    """Simulate ``y_j = R_omega(sum_i X_i h_ji + nbi_j + noise_j)``.

    ``scenes[j][i]`` is the path set between transmitter ``i`` and receive
    antenna ``j``. Noise uses ``config.snr_db`` relative to the measured
    per-sample power of the noiseless echo at that antenna.

    Interference is either passed ready-made through `nbi`, or described by
    `tones` (one ``(bin, amplitude, phase)`` list per antenna), in which
    case it is synthesized at ``config.sir_db`` relative to the same
    measured echo power.
    """
    if len(scenes) != config.rx_count or any(len(row) != config.tx_count for row in scenes):
        raise DimensionError(f"expected {config.rx_count}x{config.tx_count} scenes")
    op = config.operator(False)
    nbi = [None] * config.rx_count if nbi is None else list(nbi)
    if len(nbi) != config.rx_count or (tones is not None and len(tones) != config.rx_count):
        raise DimensionError("need one interference entry per receive antenna")
    obs, powers, sigmas, inter, full = [], [], [], [], []
    for j in range(config.rx_count):
        taps = []
        for scene in scenes[j]:
            if scene.n != config.n:
                raise DimensionError("scene length does not match config n")
            if scene.paths and scene.max_delay >= config.cp_len:
                raise SceneInvalidError(
                    f"delay {scene.max_delay} exceeds cyclic prefix {config.cp_len}"
                )
            taps.append(sample_channel(scene).taps)
        y = op.full_rate(np.concatenate(taps))
        power = float(np.mean(np.abs(y) ** 2))
        p_nbi = 0.0
        signal_nbi = nbi[j]
        if signal_nbi is None and tones is not None and tones[j] and power > 0:
            signal_nbi, _ = synthesize_nbi(tones[j], config.n, power, config.sir_db)
        if signal_nbi is not None:
            y = y + signal_nbi.time_domain
            p_nbi = signal_nbi.power
        sigma_sq = 0.0
        if not (math.isinf(config.snr_db) and config.snr_db > 0) and power > 0:
            seed = 0 if noise_seeds is None else noise_seeds[j]
            y = add_awgn(y, config.snr_db, power, seed)
            sigma_sq = noise_variance(config.snr_db, power)
        obs.append(y[config.pattern.omega])
        powers.append(power)
        sigmas.append(sigma_sq)
        inter.append(p_nbi)
        full.append(y)
    return ReceivedBlock(
        tuple(obs), tuple(powers), tuple(sigmas), tuple(inter), tuple(full) if keep_full_rate else None
    )


# --------------------------------------------------------------------------
# recovery
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MimoEstimate:
    """``channels[j][i]`` estimates the channel from transmitter i to antenna j."""

    mode: Mode
    channels: tuple[tuple[np.ndarray, ...], ...]
    nbi: tuple[np.ndarray | None, ...]
    solutions: tuple[BpdnSolution | TwoStageResult, ...]

    @property
    def stage1_channels(self) -> tuple[tuple[np.ndarray, ...], ...] | None:
        if self.mode is not Mode.TWO_STAGE:
            return None
        return tuple(tuple(r.stage1_channels) for r in self.solutions)


def default_epsilons(
    mode: Mode | str, noise_var: float, interference_power: float, m: int
) -> tuple[float, float]:
    """Noise bounds ``(primary, stage two)`` for one antenna.

    Plain recovery has no interference model, so the interference power is
    folded into the bound. Joint and two-stage programs bound AWGN only.
    """
    mode = Mode(mode)
    if mode is Mode.PLAIN:
        eps = epsilon_from_noise(noise_var + interference_power, m)
        return eps, eps
    eps = epsilon_from_noise(noise_var, m)
    return eps, eps


def recover_mimo(
    observations: Sequence[np.ndarray],
    frames: Sequence[WaveformFrame],
    pattern: SamplingPattern,
    mode: Mode | str,
    epsilons: Sequence[float],
    epsilons2: Sequence[float] | None = None,
    nbi_tones: int | None = None,
) -> MimoEstimate:
    """Run one separable program per receive antenna and split the estimates."""
    mode = Mode(mode)
    frames = tuple(frames)
    n = pattern.n
    t = len(frames)
    if len(epsilons) != len(observations):
        raise DimensionError("need one epsilon per receive antenna")
    channels, nbis, sols = [], [], []
    for j, y in enumerate(observations):
        if mode is Mode.TWO_STAGE:
            eps2 = None if epsilons2 is None else epsilons2[j]
            res = two_stage_recover(y, frames, pattern, epsilons[j], eps2, nbi_tones=nbi_tones)
            channels.append(tuple(res.channels))
            nbis.append(res.stage1_nbi)
            sols.append(res)
            continue
        op = cached_operator(frames, mode is Mode.JOINT, pattern)
        sol = solve_bpdn(BpdnProblem(op, y, epsilons[j]))
        c = sol.coefficients
        channels.append(tuple(c[i * n:(i + 1) * n] for i in range(t)))
        nbis.append(c[t * n:] if mode is Mode.JOINT else None)
        sols.append(sol)
    return MimoEstimate(mode, tuple(channels), tuple(nbis), tuple(sols))


# --------------------------------------------------------------------------
# detection
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PairDetection:
    recovered_support: tuple[int, ...]
    true_support: tuple[int, ...]
    hit: bool
    rx: int = 0
    tx: int = 0


@dataclass(frozen=True)
class DetectionReport:
    pairs: tuple[PairDetection, ...]
    tolerance_taps: int

    @property
    def overall_hit(self) -> bool:
        return all(p.hit for p in self.pairs)


def top_k_taps(estimate: np.ndarray, k: int) -> tuple[int, ...]:
    """Indices of the `k` largest-magnitude nonzero taps (ties by index)."""
    mag = np.abs(np.asarray(estimate))
    nz = np.flatnonzero(mag)
    order = nz[np.argsort(-mag[nz], kind="stable")]
    return tuple(int(i) for i in order[:k])


def detect_taps(
    channel_estimate: np.ndarray,
    k: int,
    tolerance_taps: int = 1,
    true_support: Sequence[int] = (),
) -> PairDetection:
    """Pick the top-`k` taps and score them against `true_support`.

    A hit needs every true tap to have a picked tap within
    `tolerance_taps`, and every picked tap to sit within the tolerance of
    some true tap. An all-zero estimate picks nothing and therefore misses
    any nonempty truth.
    """
    n = np.shape(channel_estimate)[0]
    if k < 1 or k > n:
        raise InvalidKError(f"k must lie in [1, {n}], got {k}")
    picked = top_k_taps(channel_estimate, k)
    truth = tuple(int(t) for t in true_support)
    p = np.asarray(picked)
    t = np.asarray(truth)
    covers = all(p.size and np.min(np.abs(p - x)) <= tolerance_taps for x in t)
    valid = all(t.size and np.min(np.abs(t - x)) <= tolerance_taps for x in p)
    return PairDetection(picked, truth, bool(covers and valid))


def detection_report(
    channels: Sequence[Sequence[np.ndarray]],
    true_supports: Sequence[Sequence[Sequence[int]]],
    k: int,
    tolerance_taps: int = 1,
) -> DetectionReport:
    pairs = []
    for j, row in enumerate(channels):
        for i, est in enumerate(row):
            d = detect_taps(est, k, tolerance_taps, true_supports[j][i])
            pairs.append(PairDetection(d.recovered_support, d.true_support, d.hit, j, i))
    return DetectionReport(tuple(pairs), tolerance_taps)
