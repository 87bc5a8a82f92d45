"""Restricted-isometry probes for small partial circulant operators.

Only directional claims are checked here: the universal constants of the
RIP sample-complexity bounds are not estimable from data.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SizeError
from .signal import MeasurementOperator, SamplingPattern, WaveformFrame, compose_operator

EXHAUSTIVE_LIMIT = 10**6
_CHUNK = 4096


class RicMethod(str, enum.Enum):
    EXHAUSTIVE = "exhaustive"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class RicEstimate:
    n: int
    m: int
    s: int
    delta_s: float
    method: RicMethod
    supports_checked: int


def _normalized_columns(operator) -> np.ndarray:
    if isinstance(operator, MeasurementOperator):
        a = operator.matrix
    else:
        a = np.asarray(operator, dtype=np.complex128)
        if a.ndim != 2:
            raise InvalidInputError("operator must be a 2-D matrix or a MeasurementOperator")
    norms = np.linalg.norm(a, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    return a / safe


def _max_deviation(a: np.ndarray, supports: np.ndarray) -> float:
    # supports: (k, s) integer array; one batched Hermitian eigensolve per chunk.
    sub = a[:, supports]  # (m, k, s)
    sub = np.moveaxis(sub, 1, 0)  # (k, m, s)
    gram = np.conj(np.swapaxes(sub, 1, 2)) @ sub
    w = np.linalg.eigvalsh(gram)
    return float(np.max(np.abs(w - 1.0)))


def estimate_ric(
    operator: MeasurementOperator | np.ndarray,
    s: int,
    mode: RicMethod | str = RicMethod.EXHAUSTIVE,
    seed: int = 0,
    samples: int = 2000,
) -> RicEstimate:
    """Estimate the order-`s` restricted isometry constant.

    Columns are scaled to unit norm first. ``delta_s`` is the largest
    ``|eig(A_S^H A_S) - 1|`` over the checked supports: exact when every
    support is enumerated, a lower bound when `samples` random supports
    are drawn.

    Raises
    ------
    SizeError
        Exhaustive mode with more than ``10**6`` supports.
    """
    mode = RicMethod(mode)
    a = _normalized_columns(operator)
    m, n_cols = a.shape
    if not 1 <= s <= n_cols:
        raise InvalidInputError(f"s must lie in [1, {n_cols}], got {s}")
    total = math.comb(n_cols, s)
    delta = 0.0
    checked = 0
    if mode is RicMethod.EXHAUSTIVE:
        if total > EXHAUSTIVE_LIMIT:
            raise SizeError(f"C({n_cols}, {s}) = {total} supports exceeds {EXHAUSTIVE_LIMIT}")
        combos = itertools.combinations(range(n_cols), s)
        while True:
            chunk = np.array(list(itertools.islice(combos, _CHUNK)), dtype=np.intp)
            if chunk.size == 0:
                break
            delta = max(delta, _max_deviation(a, chunk.reshape(-1, s)))
            checked += chunk.shape[0]
    else:
        if samples < 1:
            raise InvalidInputError("samples must be positive")
        rng = np.random.default_rng(seed)
        supports = np.array(
            [np.sort(rng.choice(n_cols, size=s, replace=False)) for _ in range(samples)],
            dtype=np.intp,
        )
        for start in range(0, samples, _CHUNK):
            delta = max(delta, _max_deviation(a, supports[start:start + _CHUNK]))
        checked = samples
    return RicEstimate(n_cols, m, s, delta, mode, checked)


@dataclass(frozen=True, eq=False)
class RicSummary:
    n: int
    m: int
    s: int
    seeds: tuple[int, ...]
    values: np.ndarray
    thresholds: tuple[float, ...]
    exceedance: tuple[float, ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def std(self) -> float:
        return float(np.std(self.values))


def probe_operator(n: int, m: int, seed: int) -> MeasurementOperator:
    """Single Rademacher partial circulant with a seed-specific random Omega."""
    frame = WaveformFrame.rademacher(n, max(1, n // 4), seed)
    omega_seed = int(np.random.SeedSequence([seed, 1]).generate_state(1)[0])
    pattern = SamplingPattern.uniform_random(n, m, omega_seed)
    return compose_operator([frame], False, pattern)


def ric_concentration_probe(
    n: int,
    m: int,
    s: int,
    waveform_seeds: int,
    first_seed: int = 0,
    thresholds: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0),
) -> RicSummary:
    """Exhaustive ``delta_s`` over independently seeded waveforms and row sets.

    Seeds are ``first_seed, first_seed + 1, ...``. The exceedance entry for
    threshold ``t`` is the fraction of seeds with ``delta_s > t``.
    """
    if waveform_seeds < 1:
        raise InvalidInputError("need at least one waveform seed")
    seeds = tuple(range(first_seed, first_seed + waveform_seeds))
    values = np.array([estimate_ric(probe_operator(n, m, k), s).delta_s for k in seeds])
    exceed = tuple(float(np.mean(values > t)) for t in thresholds)
    return RicSummary(n, m, s, seeds, values, tuple(thresholds), exceed)
