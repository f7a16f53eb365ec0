"""Command-line entry point.

``trolleyloc`` runs the single scenario from the config (one line per method
and repeat); ``trolleyloc --grid`` runs the full polar grid and writes
``trials.csv`` and ``summary.json`` to ``--out``.

Exit codes: 0 success, 2 bad flags or configuration, 3 output I/O failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, replace

from .configio import ExperimentConfig, load_experiment, parse_methods
from .errors import ConfigError, IoFailure
from .evaluation import run_grid
from .report import emit_report
from .world import MASK64, generate_grid

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


@dataclass(frozen=True)
class RunConfig:
    config_path: str | None
    methods: tuple[str, ...] | None
    seed: int | None
    repeats: int | None
    out_dir: str | None
    grid: bool
    workers: int = 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="trolleyloc",
        description="Simulate and evaluate luggage-trolley localisation methods.",
    )
    p.add_argument("--config", metavar="PATH", help="JSON experiment config (defaults are used when omitted)")
    p.add_argument("--grid", action="store_true", help="run the polar grid instead of the single config scenario")
    p.add_argument("--methods", help="comma-separated subset of rfid,keypoints,uwb,reflectors")
    p.add_argument("--seed", type=int, help="base seed (overrides the config)")
    p.add_argument("--repeats", type=int, help="Monte Carlo repeats per scenario (overrides the config)")
    p.add_argument("--out", metavar="DIR", help="report directory (default ./results for --grid)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (output does not depend on this)")
    return p


def _resolve(rc: RunConfig) -> ExperimentConfig:
    cfg = load_experiment(rc.config_path) if rc.config_path else ExperimentConfig()
    if rc.methods is not None:
        cfg = replace(cfg, methods=rc.methods)
    if rc.seed is not None:
        if not 0 <= rc.seed <= MASK64:
            raise ConfigError("--seed must lie in [0, 2**64)")
        cfg = replace(cfg, scenario=cfg.scenario.with_seed(rc.seed))
    if rc.repeats is not None:
        if rc.repeats < 1:
            raise ConfigError("--repeats must be >= 1")
        cfg = replace(cfg, repeats=rc.repeats)
    if rc.workers < 1:
        raise ConfigError("--workers must be >= 1")
    return cfg


def _fmt(v: float) -> str:
    return "nan" if not math.isfinite(v) else f"{v:.4f}"


def cmd_simulate(rc: RunConfig, cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    result = run_grid([cfg.scenario], cfg.methods, cfg.criterion, cfg.repeats, rc.workers)
    for rec in result.records:
        gt = rec.truth
        st = rec.estimate.state
        if st is None:
            est = f"none ({rec.estimate.failure})"
        elif rec.estimate.has_heading:
            est = f"({_fmt(st.x)}, {_fmt(st.y)}, {_fmt(math.degrees(st.theta))}deg)"
        else:
            est = f"({_fmt(st.x)}, {_fmt(st.y)}, -)"
        print(
            f"repeat={rec.repeat} method={rec.method} est={est} "
            f"gt=({_fmt(gt.x)}, {_fmt(gt.y)}, {_fmt(math.degrees(gt.theta))}deg) "
            f"pos_err={_fmt(rec.pos_error)} yaw_err_deg={_fmt(math.degrees(rec.yaw_error))} "
            f"success={int(rec.success)}",
            file=out,
        )
    if rc.out_dir:
        emit_report(result, rc.out_dir, _run_info(cfg, grid=False))
    return EXIT_OK


def _run_info(cfg: ExperimentConfig, grid: bool) -> dict:
    return {"mode": "grid" if grid else "simulate", "seed": cfg.scenario.seed}


def cmd_grid(rc: RunConfig, cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    scenarios = generate_grid(cfg.grid, cfg.scenario)
    result = run_grid(scenarios, cfg.methods, cfg.criterion, cfg.repeats, rc.workers)
    csv_path, json_path = emit_report(result, rc.out_dir or "results", _run_info(cfg, grid=True))
    print(f"{len(scenarios)} scenarios x {len(cfg.methods)} methods x {cfg.repeats} repeats", file=out)
    for m in cfg.methods:
        rates = result.success_map[m].values()
        line = f"{m:>10}: mean success {sum(rates) / len(rates):.3f}"
        s = result.error_stats.get(m)
        if s is not None:
            line += f"  MAE {s.mae:.4f} m  RMSE {s.rmse:.4f} m  (n={s.n})"
        print(line, file=out)
    print(f"wrote {csv_path} and {json_path}", file=out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        methods = parse_methods(args.methods) if args.methods is not None else None
        rc = RunConfig(args.config, methods, args.seed, args.repeats, args.out, args.grid, args.workers)
        cfg = _resolve(rc)
        return cmd_grid(rc, cfg) if rc.grid else cmd_simulate(rc, cfg)
    except ConfigError as exc:
        print(f"trolleyloc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IoFailure as exc:
        print(f"trolleyloc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
