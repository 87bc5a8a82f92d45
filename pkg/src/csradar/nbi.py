"""Narrowband interference: synthesis, joint recovery and two-stage cancellation.

The received block of antenna ``j`` is modelled as

    y_j = R_omega (sum_i C(x_i) h_ji / sqrt(n)  +  F^H j_f  +  noise)

with ``j_f`` sparse: a tone occupies one DFT bin.  Joint recovery solves one
BPDN program over the stacked unknown ``[h_j1; h_j2; j_f]``; the two-stage
variant removes the recovered interference and re-estimates the channel
alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidInputError, InvalidPowerError, InvalidTonesError
from .signal import (
    MeasurementOperator,
    SamplingPattern,
    WaveformFrame,
    compose_operator,
    partial_fourier_adjoint,
    unitary_dft,
    unitary_idft,
)
from .solver import BpdnProblem, BpdnSolution, solve_bpdn


@dataclass(frozen=True, eq=False)
class NbiSignal:
    freq_coeffs: np.ndarray
    tone_bins: tuple[int, ...]
    sir_db: float

    @property
    def n(self) -> int:
        return self.freq_coeffs.shape[0]

    @property
    def time_domain(self) -> np.ndarray:
        return unitary_idft(self.freq_coeffs)

    @property
    def power(self) -> float:
        """Mean per-sample power of the time-domain interference."""
        return float(np.vdot(self.freq_coeffs, self.freq_coeffs).real) / self.n


def nbi_power(signal_power: float, sir_db: float) -> float:
    if math.isinf(sir_db) and sir_db > 0:
        return 0.0
    return signal_power / 10.0 ** (sir_db / 10.0)


def synthesize_nbi(
    tones: Sequence[tuple[int, float | None, float]],
    n: int,
    signal_power: float,
    sir_db: float,
) -> tuple[NbiSignal, np.ndarray]:
    """Build on-grid interference from ``(bin, amplitude, phase)`` triples.

    The total interference power is ``signal_power / 10**(sir_db/10)``.
    When every amplitude is None the power is split equally; otherwise
    amplitudes act as relative weights. Phases are in radians.
    """
    if not signal_power > 0:
        raise InvalidPowerError(f"signal power must be positive, got {signal_power}")
    bins = [int(t[0]) for t in tones]
    if len(set(bins)) != len(bins):
        raise InvalidTonesError(f"duplicate tone bins: {bins}")
    if any(not 0 <= b < n for b in bins):
        raise InvalidTonesError(f"tone bins must lie in [0, {n})")
    coeffs = np.zeros(n, dtype=np.complex128)
    total = nbi_power(signal_power, sir_db)
    if bins and total > 0:
        amps = [t[1] for t in tones]
        if all(a is None for a in amps):
            weights = np.ones(len(bins))
        elif any(a is None for a in amps):
            raise InvalidTonesError("give either all tone amplitudes or none")
        else:
            weights = np.abs(np.asarray(amps, dtype=float)) ** 2
            if weights.sum() == 0:
                raise InvalidTonesError("tone amplitudes are all zero")
        weights = weights / weights.sum()
        # ||j_f||^2 = n * per-sample power under the unitary DFT.
        mags = np.sqrt(weights * total * n)
        phases = np.array([float(t[2]) for t in tones])
        coeffs[bins] = mags * np.exp(1j * phases)
    signal = NbiSignal(coeffs, tuple(bins), float(sir_db))
    return signal, signal.time_domain


def random_tones(rng: np.random.Generator, n: int, count: int) -> list[tuple[int, None, float]]:
    bins = rng.choice(n, size=count, replace=False)
    phases = 2 * np.pi * rng.random(count)
    return [(int(b), None, float(p)) for b, p in zip(bins, phases)]


def synthesize_offgrid_nbi(
    frequencies: Sequence[float],
    n: int,
    signal_power: float,
    sir_db: float,
    phases: Sequence[float] | None = None,
) -> tuple[NbiSignal, np.ndarray]:
    """Tones at fractional bin positions; the spectrum leaks into every bin.

    Meant for stress tests only, the recovery dictionary assumes on-grid tones.
    """
    if not signal_power > 0:
        raise InvalidPowerError(f"signal power must be positive, got {signal_power}")
    k = np.arange(n)
    phases = [0.0] * len(frequencies) if phases is None else list(phases)
    x = np.zeros(n, dtype=np.complex128)
    total = nbi_power(signal_power, sir_db)
    for f, ph in zip(frequencies, phases):
        x += np.sqrt(total / len(frequencies)) * np.exp(1j * (2 * np.pi * f * k / n + ph))
    coeffs = unitary_dft(x)
    bins = tuple(int(round(f)) % n for f in frequencies)
    return NbiSignal(coeffs, bins, float(sir_db)), x


@lru_cache(maxsize=64)
def cached_operator(frames: tuple[WaveformFrame, ...], include_nbi: bool, pattern: SamplingPattern):
    return compose_operator(frames, include_nbi, pattern)


def joint_recover(
    observation: np.ndarray,
    frames: Sequence[WaveformFrame],
    pattern: SamplingPattern,
    epsilon_prime: float,
    *,
    max_iterations: int = 200,
    tolerance: float = 1e-4,
) -> BpdnSolution:
    """Recover ``s = [h_1; ...; h_T; j_f]`` from one antenna's samples.

    Coefficients ``[i*n, (i+1)*n)`` are the channel from transmitter ``i``;
    the last ``n`` are the interference spectrum.
    """
    op = cached_operator(tuple(frames), True, pattern)
    return solve_bpdn(BpdnProblem(op, observation, epsilon_prime), max_iterations, tolerance)


def cancel_nbi(
    observation: np.ndarray, nbi_estimate: np.ndarray, pattern: SamplingPattern
) -> np.ndarray:
    """Subtract the sub-sampled time-domain image of an interference estimate."""
    observation = np.asarray(observation)
    if observation.shape[0] != pattern.m:
        raise DimensionError(
            f"observation length {observation.shape[0]} does not match pattern m={pattern.m}"
        )
    return observation - partial_fourier_adjoint(nbi_estimate, pattern)


def nbi_residual_energy(
    true_freq: np.ndarray, nbi_estimate: np.ndarray, pattern: SamplingPattern
) -> float:
    """``||R_omega F^H (j_f - j_f_est)||^2``: interference left after cancelling."""
    w = partial_fourier_adjoint(np.asarray(true_freq) - np.asarray(nbi_estimate), pattern)
    return float(np.vdot(w, w).real)


def refine_nbi_estimate(
    observation: np.ndarray,
    stage1: BpdnSolution,
    operator: MeasurementOperator,
    tones: int,
) -> np.ndarray:
    """Keep the `tones` strongest bins of the joint estimate and refit them.

    The kept amplitudes are the least-squares fit of the partial Fourier
    columns to the observation minus the stage-one channel contribution,
    which removes the l1 shrinkage on the interference.
    """
    if tones < 0:
        raise InvalidInputError(f"tone count must be >= 0, got {tones}")
    _, raw = operator.split(stage1.coefficients)
    refined = np.zeros_like(raw)
    nonzero = np.flatnonzero(raw)
    if tones == 0 or nonzero.size == 0:
        return refined
    order = nonzero[np.argsort(-np.abs(raw[nonzero]), kind="stable")]
    keep = np.sort(order[:tones])
    a = operator.matrix
    channel = stage1.coefficients.copy()
    channel[operator.nbi_slice] = 0
    target = np.asarray(observation) - a @ channel
    cols = a[:, operator.channel_dim + keep]
    refined[keep] = np.linalg.lstsq(cols, target, rcond=None)[0]
    return refined


@dataclass(frozen=True, eq=False)
class TwoStageResult:
    stage1: BpdnSolution
    nbi_estimate: np.ndarray
    cleaned: np.ndarray
    stage2: BpdnSolution
    residual_nbi_energy: float
    n: int

    @property
    def channels(self) -> list[np.ndarray]:
        c = self.stage2.coefficients
        return [c[i * self.n:(i + 1) * self.n] for i in range(c.shape[0] // self.n)]

    @property
    def stage1_channels(self) -> list[np.ndarray]:
        c = self.stage1.coefficients
        t = c.shape[0] // self.n - 1
        return [c[i * self.n:(i + 1) * self.n] for i in range(t)]

    @property
    def stage1_nbi(self) -> np.ndarray:
        return self.stage1.coefficients[-self.n:]


def two_stage_recover(
    observation: np.ndarray,
    frames: Sequence[WaveformFrame],
    pattern: SamplingPattern,
    epsilon_prime: float,
    epsilon_double_prime: float | None = None,
    *,
    nbi_tones: int | None = None,
    max_iterations: int = 200,
    tolerance: float = 1e-4,
) -> TwoStageResult:
    """Joint recovery, interference cancellation, channel-only re-estimation.

    Parameters
    ----------
    epsilon_double_prime : float, optional
        Noise bound for the channel-only program; defaults to `epsilon_prime`.
    nbi_tones : int, optional
        When given, the interference estimate is pruned to this many bins and
        refit (see :func:`refine_nbi_estimate`). When None the raw stage-one
        interference block is cancelled as is.

    Notes
    -----
    Stage-two infeasibility is reported through ``stage2.converged`` and is
    not raised.  ``residual_nbi_energy`` is the squared stage-two residual,
    the receiver-side estimate of ``||w + n||^2``.
    """
    frames = tuple(frames)
    joint_op = cached_operator(frames, True, pattern)
    stage1 = solve_bpdn(BpdnProblem(joint_op, observation, epsilon_prime), max_iterations, tolerance)
    if nbi_tones is None:
        estimate = stage1.coefficients[joint_op.nbi_slice].copy()
    else:
        estimate = refine_nbi_estimate(observation, stage1, joint_op, nbi_tones)
    cleaned = cancel_nbi(observation, estimate, pattern)
    eps2 = epsilon_prime if epsilon_double_prime is None else epsilon_double_prime
    channel_op = cached_operator(frames, False, pattern)
    stage2 = solve_bpdn(BpdnProblem(channel_op, cleaned, eps2), max_iterations, tolerance)
    return TwoStageResult(
        stage1=stage1,
        nbi_estimate=estimate,
        cleaned=cleaned,
        stage2=stage2,
        residual_nbi_energy=float(stage2.residual_norm ** 2),
        n=pattern.n,
    )
