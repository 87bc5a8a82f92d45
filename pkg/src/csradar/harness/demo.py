"""Single-target recovery demo: received record, channel and interference."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..channel import PathComponent, Scene
from ..errors import SceneInvalidError
from ..iq import RecordFlag, write_record
from ..mimo import MimoConfig, Mode, default_epsilons, recover_mimo, simulate_receive
from ..signal import OmegaMode
from .plots import plot_demo
from .sweep import STREAM_NBI, STREAM_NOISE, STREAM_SCENE, trial_rng

DEFAULT_TONE_BIN = 45


@dataclass(frozen=True, eq=False)
class DemoBundle:
    received: np.ndarray
    channel: np.ndarray
    nbi: np.ndarray | None
    true_delay: float
    tone_bin: int | None
    files: tuple[Path, ...]

    @property
    def peak_tap(self) -> int:
        return int(np.argmax(np.abs(self.channel)))

    @property
    def peak_bin(self) -> int | None:
        return None if self.nbi is None else int(np.argmax(np.abs(self.nbi)))


def demo_single_target(
    config: MimoConfig,
    delay: float = 3.0,
    out_dir: str | Path = ".",
    master_seed: int = 0,
    prefix: str = "demo",
    scene: Scene | None = None,
) -> DemoBundle:
    """Recover one target and one tone and write the three-panel bundle.

    Every transmit/receive pair sees the same delay with its own random
    phase. Antenna 0 and transmitter 0 are the ones plotted and saved. The
    channel panel is the stage-two estimate; the interference panel is the
    raw stage-one spectrum, which shows how concentrated the recovery is.
    A given `scene` replaces the single target on every pair; its first
    path is reported as the true delay.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = trial_rng(master_seed, 0, 0, STREAM_SCENE)
    if scene is not None:
        if not scene.paths:
            raise SceneInvalidError("demo scene has no paths")
        delay = scene.paths[0].tau
    scenes = [
        [
            scene
            if scene is not None
            else Scene(
                (PathComponent(complex(np.exp(2j * np.pi * rng.random())), float(delay)),),
                config.n,
                config.cp_len,
            )
            for _ in range(config.tx_count)
        ]
        for _ in range(config.rx_count)
    ]
    tones = None
    tone_bin = None
    if config.nbi_tones > 0:
        rng_nbi = trial_rng(master_seed, 0, 0, STREAM_NBI)
        bins = config.nbi_bins
        if bins is None:
            first = DEFAULT_TONE_BIN % config.n
            others = np.delete(np.arange(config.n), first)
            extra = rng_nbi.choice(others, size=config.nbi_tones - 1, replace=False)
            bins = (first,) + tuple(int(b) for b in extra)
        tone_bin = int(bins[0])
        tones = [
            [(int(b), None, float(2 * np.pi * rng_nbi.random())) for b in bins]
            for _ in range(config.rx_count)
        ]
    noise = [trial_rng(master_seed, 0, 0, STREAM_NOISE + j) for j in range(config.rx_count)]
    block = simulate_receive(config, scenes, noise_seeds=noise, tones=tones)
    eps = [
        default_epsilons(Mode.TWO_STAGE, block.noise_variance[j], block.nbi_power[j], config.m)[0]
        for j in range(config.rx_count)
    ]
    est = recover_mimo(
        block.observations, config.frames, config.pattern, Mode.TWO_STAGE, eps, nbi_tones=config.nbi_tones
    )
    received = block.observations[0]
    channel = est.channels[0][0]
    nbi = est.nbi[0] if config.nbi_tones > 0 else None

    rx_flags = RecordFlag.SUBSAMPLED
    if config.omega_mode is OmegaMode.REGULAR_DECIMATION:
        rx_flags |= RecordFlag.REGULAR_DECIMATION
    files = [
        write_record(out_dir / f"{prefix}_received.csr1", received, config.n, rx_flags),
        write_record(out_dir / f"{prefix}_channel.csr1", channel, config.n),
        write_record(
            out_dir / f"{prefix}_nbi.csr1",
            np.zeros(config.n, dtype=complex) if nbi is None else nbi,
            config.n,
            RecordFlag.FREQUENCY_DOMAIN,
        ),
        plot_demo(config.pattern.omega, received, channel, nbi, out_dir / f"{prefix}.svg"),
    ]
    return DemoBundle(received, channel, nbi, float(delay), tone_bin, tuple(files))
