"""Flat ``key = value`` experiment configuration.

Lines starting with ``#`` and trailing ``# ...`` parts are comments;
nesting is expressed with dotted keys such as ``nbi.tones``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..mimo import MimoConfig, Mode
from ..signal import OmegaMode

_INF_WORDS = {"inf", "+inf", "infinity", "none", "off"}


def _float(key: str, text: str) -> float:
    low = text.strip().lower()
    if low in _INF_WORDS:
        return math.inf
    if low == "-inf":
        return -math.inf
    try:
        return float(low)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None


def _int(key: str, text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 128
    cp_len: int = 32
    m: int = 43
    omega_mode: OmegaMode = OmegaMode.UNIFORM_RANDOM
    snr_db: float = 20.0
    sir_db: float = math.inf
    targets: int = 1
    nbi_tones: int = 0
    nbi_bins: tuple[int, ...] | None = None
    modes: tuple[Mode, ...] = (Mode.TWO_STAGE,)
    sweep_axis: str | None = None
    sweep_grid: tuple[float, ...] = ()
    trials: int = 500
    waveform_seed: int = 1
    omega_seed: int = 2
    master_seed: int = 0
    tolerance_taps: int = 1
    scene: str | None = None
    demo_delay: float = 3.0
    epsilon: float | None = None
    ric_n: int = 16
    ric_m: tuple[int, ...] = (6, 8, 10, 12)
    ric_s: int = 2
    ric_seeds: int = 50
    source: Path | None = field(default=None, compare=False)

    def mimo(self, **changes) -> MimoConfig:
        base = MimoConfig(
            n=self.n,
            cp_len=self.cp_len,
            m=self.m,
            waveform_seed=self.waveform_seed,
            omega_seed=self.omega_seed,
            omega_mode=self.omega_mode,
            snr_db=self.snr_db,
            sir_db=self.sir_db,
            targets=self.targets,
            nbi_tones=self.nbi_tones,
            nbi_bins=self.nbi_bins,
            tolerance_taps=self.tolerance_taps,
        )
        return base.replace(**changes) if changes else base


def _apply(values: dict, key: str, raw: str) -> None:
    if key in ("n", "cp_len", "m", "targets", "trials", "tolerance_taps"):
        values[key] = _int(key, raw)
    elif key in ("snr_db", "sir_db", "nbi.sir_db"):
        values["sir_db" if key == "nbi.sir_db" else key] = _float(key, raw)
    elif key == "omega_mode":
        try:
            values[key] = OmegaMode(raw.strip())
        except ValueError:
            raise ConfigError(f"omega_mode: unknown mode {raw!r}") from None
    elif key == "nbi.tones":
        values["nbi_tones"] = _int(key, raw)
    elif key == "nbi.bins":
        if raw.strip().lower() == "random":
            values["nbi_bins"] = None
        else:
            values["nbi_bins"] = tuple(_int(key, b) for b in _list(raw))
    elif key == "mode":
        try:
            values["modes"] = tuple(Mode(v) for v in _list(raw))
        except ValueError:
            raise ConfigError(f"mode: unknown entry in {raw!r}") from None
    elif key == "sweep.axis":
        axis = raw.strip()
        if axis not in ("sir_db", "snr_db"):
            raise ConfigError(f"sweep.axis must be sir_db or snr_db, got {axis!r}")
        values["sweep_axis"] = axis
    elif key == "sweep.grid":
        values["sweep_grid"] = tuple(_float(key, v) for v in _list(raw))
    elif key in ("seed.waveform", "seed.omega", "master_seed"):
        values[{"seed.waveform": "waveform_seed", "seed.omega": "omega_seed"}.get(key, key)] = _int(
            key, raw
        )
    elif key == "scene":
        values["scene"] = raw.strip()
    elif key == "demo.delay":
        values["demo_delay"] = _float(key, raw)
    elif key == "epsilon":
        values["epsilon"] = _float(key, raw)
    elif key in ("ric.n", "ric.s", "ric.seeds"):
        values[key.replace(".", "_")] = _int(key, raw)
    elif key == "ric.m":
        values["ric_m"] = tuple(_int(key, v) for v in _list(raw))
    else:
        raise ConfigError(f"unknown config key {key!r}")


def parse_config(text: str, source: Path | None = None) -> ExperimentConfig:
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (p.strip() for p in body.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        _apply(values, key, raw)
    if source is not None and values.get("scene"):
        scene = Path(values["scene"])
        if not scene.is_absolute():
            values["scene"] = str(source.parent / scene)
    cfg = ExperimentConfig(**values, source=source)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if cfg.targets < 0 or cfg.nbi_tones < 0:
        raise ConfigError("targets and nbi.tones must be >= 0")
    if not 0 < cfg.cp_len < cfg.n:
        raise ConfigError(f"cp_len must satisfy 0 < cp_len < n, got {cfg.cp_len}")
    if not 1 <= cfg.m <= cfg.n:
        raise ConfigError(f"m must satisfy 1 <= m <= n, got {cfg.m}")
    if cfg.targets > cfg.cp_len:
        raise ConfigError("more targets than distinct delays inside the cyclic prefix")
    if cfg.nbi_bins is not None:
        if len(cfg.nbi_bins) != cfg.nbi_tones:
            raise ConfigError("nbi.bins must list exactly nbi.tones bins")
        if len(set(cfg.nbi_bins)) != len(cfg.nbi_bins) or any(
            not 0 <= b < cfg.n for b in cfg.nbi_bins
        ):
            raise ConfigError("nbi.bins must be distinct and inside [0, n)")
    grid = cfg.sweep_grid
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("sweep.grid must be strictly increasing")
    if not cfg.modes:
        raise ConfigError("mode must list at least one recovery mode")


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
    return parse_config(text, source=path)
