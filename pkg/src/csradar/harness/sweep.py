"""Monte Carlo Pd sweeps with order-independent seeding."""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..channel import random_scene, sample_channel
from ..errors import ConfigError
from ..mimo import (
    MimoConfig,
    Mode,
    default_epsilons,
    detection_report,
    recover_mimo,
    simulate_receive,
)
from ..solver import BpdnProblem, solve_bpdn

# Independent random streams of one trial.
STREAM_SCENE = 0
STREAM_NBI = 1
STREAM_NOISE = 2  # + receive antenna index


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: tuple[float, ...]
    fixed: float
    trials_per_point: int
    modes: tuple[Mode, ...]
    targets: int = 1
    nbi_tones: int = 1

    def __post_init__(self) -> None:
        if self.axis not in ("sir_db", "snr_db"):
            raise ConfigError(f"sweep axis must be sir_db or snr_db, got {self.axis!r}")
        if not self.grid:
            raise ConfigError("sweep grid is empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("sweep grid must be strictly increasing")
        if self.trials_per_point < 1:
            raise ConfigError("trials_per_point must be >= 1")
        if not self.modes:
            raise ConfigError("at least one recovery mode is required")
        if self.targets < 1:
            raise ConfigError("sweeps need at least one target")
        object.__setattr__(self, "modes", tuple(Mode(m) for m in self.modes))
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))

    @property
    def fixed_axis(self) -> str:
        return "snr_db" if self.axis == "sir_db" else "sir_db"


@dataclass(frozen=True)
class TrialRecord:
    point_value: float
    trial_index: int
    mode: str
    hit: bool
    seeds: tuple[int, int, int]
    stage1_hit: bool | None = None


@dataclass(frozen=True)
class PdRow:
    point: float
    mode: str
    trials: int
    hits: int

    @property
    def pd(self) -> float:
        return self.hits / self.trials


def format_point(value: float) -> str:
    return format(value, "g")


@dataclass(frozen=True, eq=False)
class SweepResult:
    spec: SweepSpec
    master_seed: int
    rows: tuple[PdRow, ...]
    records: tuple[TrialRecord, ...]

    def pd(self, point: float, mode: Mode | str) -> float:
        mode = Mode(mode).value
        for row in self.rows:
            if row.point == point and row.mode == mode:
                return row.pd
        raise KeyError((point, mode))

    def curve(self, mode: Mode | str) -> list[float]:
        return [self.pd(p, mode) for p in self.spec.grid]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("point,mode,trials,hits,pd\n")
        for r in self.rows:
            out.write(f"{format_point(r.point)},{r.mode},{r.trials},{r.hits},{r.pd:.6f}\n")
        return out.getvalue()


def trial_rng(master_seed: int, point_index: int, trial_index: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(point_index, trial_index, stream))
    return np.random.default_rng(ss)


def run_trial(
    config: MimoConfig,
    modes: Sequence[Mode],
    master_seed: int,
    point_index: int,
    trial_index: int,
    point_value: float = math.nan,
) -> list[TrialRecord]:
    """Simulate one scene set and score every requested recovery mode.

    Joint recovery is the first stage of the two-stage scheme, so when both
    are requested the joint program is solved once.
    """
    n, cp, k = config.n, config.cp_len, config.targets
    rng_scene = trial_rng(master_seed, point_index, trial_index, STREAM_SCENE)
    scenes = [
        [random_scene(rng_scene, n, cp, k) for _ in range(config.tx_count)]
        for _ in range(config.rx_count)
    ]
    truth = [[sample_channel(sc).true_support for sc in row] for row in scenes]

    tones = None
    has_nbi = config.nbi_tones > 0 and not (math.isinf(config.sir_db) and config.sir_db > 0)
    if has_nbi:
        rng_nbi = trial_rng(master_seed, point_index, trial_index, STREAM_NBI)
        if config.nbi_bins is None:
            bins = rng_nbi.choice(n, size=config.nbi_tones, replace=False)
        else:
            bins = np.asarray(config.nbi_bins)
        # One jammer seen by every antenna: shared bins, independent phases.
        tones = [
            [(int(b), None, float(2 * np.pi * rng_nbi.random())) for b in bins]
            for _ in range(config.rx_count)
        ]
    noise = [
        trial_rng(master_seed, point_index, trial_index, STREAM_NOISE + j)
        for j in range(config.rx_count)
    ]
    block = simulate_receive(config, scenes, noise_seeds=noise, tones=tones)

    seeds = (int(master_seed), point_index, trial_index)
    records = []
    frames, pattern = config.frames, config.pattern
    eps = {}
    for mode in set(modes) | ({Mode.JOINT} if Mode.TWO_STAGE in modes else set()):
        eps[mode] = [
            default_epsilons(mode, block.noise_variance[j], block.nbi_power[j], config.m)[0]
            for j in range(config.rx_count)
        ]
    hits: dict[Mode, bool] = {}
    stage1 = None
    if Mode.PLAIN in modes:
        est = recover_mimo(block.observations, frames, pattern, Mode.PLAIN, eps[Mode.PLAIN])
        hits[Mode.PLAIN] = detection_report(est.channels, truth, k, config.tolerance_taps).overall_hit
    if Mode.TWO_STAGE in modes:
        est = recover_mimo(
            block.observations,
            frames,
            pattern,
            Mode.TWO_STAGE,
            eps[Mode.TWO_STAGE],
            nbi_tones=config.nbi_tones,
        )
        hits[Mode.TWO_STAGE] = detection_report(
            est.channels, truth, k, config.tolerance_taps
        ).overall_hit
        stage1 = detection_report(est.stage1_channels, truth, k, config.tolerance_taps).overall_hit
        hits[Mode.JOINT] = stage1
    elif Mode.JOINT in modes:
        est = recover_mimo(block.observations, frames, pattern, Mode.JOINT, eps[Mode.JOINT])
        hits[Mode.JOINT] = detection_report(est.channels, truth, k, config.tolerance_taps).overall_hit
    for mode in modes:
        records.append(
            TrialRecord(
                float(point_value),
                trial_index,
                mode.value,
                bool(hits[mode]),
                seeds,
                stage1 if mode is Mode.TWO_STAGE else None,
            )
        )
    return records


def point_config(base: MimoConfig, spec: SweepSpec, value: float) -> MimoConfig:
    return base.replace(
        **{spec.axis: value, spec.fixed_axis: spec.fixed},
        targets=spec.targets,
        nbi_tones=spec.nbi_tones,
        nbi_bins=base.nbi_bins if base.nbi_bins and len(base.nbi_bins) == spec.nbi_tones else None,
    )


def warm_up(config: MimoConfig) -> None:
    """Build shared lazily cached state before worker threads touch it."""
    for include in (False, True):
        _ = config.operator(include).matrix
    y = config.operator(False).forward(np.ones(config.operator(False).in_dim))
    solve_bpdn(BpdnProblem(config.operator(False), y, 0.5 * float(np.linalg.norm(y))))


def resolve_threads(threads: int) -> int:
    if threads < 0:
        raise ConfigError("threads must be >= 0")
    return threads or (os.cpu_count() or 1)


def run_sweep(
    spec: SweepSpec,
    config: MimoConfig,
    master_seed: int = 0,
    threads: int = 1,
) -> SweepResult:
    """Pd per ``(grid point, mode)``; deterministic for a given master seed.

    Trials are scheduled on a thread pool (the solver kernel releases the
    GIL); results are merged in ``(point, trial, mode)`` order, so the
    output never depends on the thread count.
    """
    workers = resolve_threads(threads)
    configs = [point_config(config, spec, v) for v in spec.grid]
    for cfg in configs:
        warm_up(cfg)
    tasks = [(p, t) for p in range(len(spec.grid)) for t in range(spec.trials_per_point)]

    def work(task: tuple[int, int]) -> list[TrialRecord]:
        p, t = task
        return run_trial(configs[p], spec.modes, master_seed, p, t, spec.grid[p])

    if workers == 1:
        results = [work(task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, tasks, chunksize=8))
    records = tuple(r for batch in results for r in batch)
    return SweepResult(spec, int(master_seed), aggregate(records, spec), records)


def aggregate(records: Sequence[TrialRecord], spec: SweepSpec) -> tuple[PdRow, ...]:
    counts: dict[tuple[float, str], list[int]] = {}
    for r in records:
        c = counts.setdefault((r.point_value, r.mode), [0, 0])
        c[0] += 1
        c[1] += int(r.hit)
    rows = []
    for p in spec.grid:
        for mode in spec.modes:
            trials, hits = counts.get((p, mode.value), (0, 0))
            rows.append(PdRow(p, mode.value, trials, hits))
    return tuple(rows)
