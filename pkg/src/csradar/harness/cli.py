"""Command-line entry point: ``csradar {demo,sweep,recover,ric-probe}``.

Exit status is 0 on success, 1 for usage or configuration errors and 2 for
runtime failures.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ..analysis import estimate_ric, probe_operator
from ..channel import load_scene
from ..errors import ConfigError, CsRadarError
from ..iq import RecordFlag, read_record, write_record
from ..mimo import Mode, default_epsilons, recover_mimo
from .config import ExperimentConfig, load_config
from .demo import demo_single_target
from .plots import plot_pd
from .sweep import SweepSpec, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value experiment file")
    common.add_argument("--out", type=Path, help="output file or directory")
    common.add_argument("--master-seed", type=int, default=None, help="overrides master_seed")
    common.add_argument("--trials", type=int, default=None, help="overrides trials")
    common.add_argument("--threads", type=int, default=1, help="worker threads, 0 = all cores")

    parser = _Parser(prog="csradar", description="Sub-Nyquist MIMO radar channel recovery")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("demo", parents=[common], help="single-target recovery bundle")
    sub.add_parser("sweep", parents=[common], help="Monte Carlo Pd sweep to CSV and SVG")
    rec = sub.add_parser("recover", parents=[common], help="recover channels from CSR1 records")
    rec.add_argument("inputs", nargs="+", type=Path, help="one sub-sampled CSR1 record per antenna")
    sub.add_parser("ric-probe", parents=[common], help="restricted isometry constant CSV")
    return parser


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig() if args.config is None else load_config(args.config)
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("--trials must be >= 1")
        cfg = replace(cfg, trials=args.trials)
    if args.master_seed is not None:
        if args.master_seed < 0:
            raise ConfigError("--master-seed must be >= 0")
        cfg = replace(cfg, master_seed=args.master_seed)
    if args.threads < 0:
        raise ConfigError("--threads must be >= 0")
    return cfg


def cmd_demo(args, cfg: ExperimentConfig) -> int:
    out = args.out or Path(".")
    scene = None if cfg.scene is None else load_scene(cfg.scene, cfg.n, cfg.cp_len)
    bundle = demo_single_target(cfg.mimo(), cfg.demo_delay, out, cfg.master_seed, scene=scene)
    for f in bundle.files:
        print(f)
    print(f"peak tap {bundle.peak_tap} (true delay {bundle.true_delay:g})")
    if bundle.peak_bin is not None:
        print(f"peak interference bin {bundle.peak_bin} (injected {bundle.tone_bin})")
    return EXIT_OK


def cmd_sweep(args, cfg: ExperimentConfig) -> int:
    if cfg.sweep_axis is None or not cfg.sweep_grid:
        raise ConfigError("sweep needs sweep.axis and sweep.grid")
    fixed = cfg.snr_db if cfg.sweep_axis == "sir_db" else cfg.sir_db
    spec = SweepSpec(
        cfg.sweep_axis, cfg.sweep_grid, fixed, cfg.trials, cfg.modes, cfg.targets, cfg.nbi_tones
    )
    result = run_sweep(spec, cfg.mimo(), cfg.master_seed, args.threads)
    csv = result.to_csv()
    if args.out is None:
        sys.stdout.write(csv)
        return EXIT_OK
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(csv)
    label = "SIR (dB)" if spec.axis == "sir_db" else "SNR (dB)"
    svg = plot_pd(
        spec.grid,
        {m.value: result.curve(m) for m in spec.modes},
        label,
        args.out.with_suffix(".svg"),
    )
    print(args.out)
    print(svg)
    return EXIT_OK


def estimate_epsilons(
    observations: Sequence[np.ndarray], cfg: ExperimentConfig, mode: Mode
) -> list[float]:
    """Per-antenna noise bound from the received power and the nominal SNR/SIR.

    The received power is split as ``P (1 + 1/snr + 1/sir)`` (linear ratios)
    to recover the echo power ``P``.
    """
    if cfg.epsilon is not None:
        return [cfg.epsilon] * len(observations)
    inv_snr = 0.0 if math.isinf(cfg.snr_db) else 10.0 ** (-cfg.snr_db / 10.0)
    inv_sir = 0.0 if math.isinf(cfg.sir_db) else 10.0 ** (-cfg.sir_db / 10.0)
    out = []
    for y in observations:
        p_rx = float(np.mean(np.abs(y) ** 2)) if y.size else 0.0
        p_sig = p_rx / (1.0 + inv_snr + inv_sir)
        out.append(default_epsilons(mode, p_sig * inv_snr, p_sig * inv_sir, cfg.m)[0])
    return out


def cmd_recover(args, cfg: ExperimentConfig) -> int:
    mimo = cfg.mimo()
    records = [read_record(p) for p in args.inputs]
    for path, rec in zip(args.inputs, records):
        if rec.n != mimo.n or rec.m != mimo.m:
            raise ConfigError(
                f"{path}: record has n={rec.n}, m={rec.m}; config expects n={mimo.n}, m={mimo.m}"
            )
    mode = cfg.modes[-1]
    observations = [r.data for r in records]
    eps = estimate_epsilons(observations, cfg, mode)
    est = recover_mimo(
        observations, mimo.frames, mimo.pattern, mode, eps, nbi_tones=cfg.nbi_tones or None
    )
    out = args.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    for j, row in enumerate(est.channels):
        stacked = np.concatenate(row)
        print(write_record(out / f"channel_rx{j}.csr1", stacked, mimo.n, RecordFlag.STACKED))
        if est.nbi[j] is not None:
            print(write_record(out / f"nbi_rx{j}.csr1", est.nbi[j], mimo.n, RecordFlag.FREQUENCY_DOMAIN))
    return EXIT_OK


def cmd_ric(args, cfg: ExperimentConfig) -> int:
    lines = ["n,m,s,seed,delta_s"]
    for m in cfg.ric_m:
        if not 1 <= m <= cfg.ric_n:
            raise ConfigError(f"ric.m entry {m} outside [1, {cfg.ric_n}]")
        for seed in range(cfg.master_seed, cfg.master_seed + cfg.ric_seeds):
            d = estimate_ric(probe_operator(cfg.ric_n, m, seed), cfg.ric_s).delta_s
            lines.append(f"{cfg.ric_n},{m},{cfg.ric_s},{seed},{d:.12f}")
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
        print(args.out)
    return EXIT_OK


_COMMANDS = {"demo": cmd_demo, "sweep": cmd_sweep, "recover": cmd_recover, "ric-probe": cmd_ric}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_CONFIG
        cfg = _config(args)
        return _COMMANDS[args.command](args, cfg)
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"csradar: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CsRadarError, np.linalg.LinAlgError, OSError) as exc:
        print(f"csradar: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
