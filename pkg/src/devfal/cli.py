"""Command line front end.

Three subcommands, each driven by a JSON config file:

  devfal falsify  CONFIG   run the (optimizer x seed) falsification campaign
  devfal gridscan CONFIG   sweep a 2-dim deviation grid with the lower layer
  devfal eval     CONFIG   score one (deviation, scenario) rollout

Exit codes: 0 success, 2 configuration error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib.metadata import version
from pathlib import Path

from .campaign import export_campaign, format_summary_table, run_campaign
from .config import (
    ConfigError,
    load_eval_config,
    load_falsify_config,
    load_gridscan_config,
)
from .gridscan import scan, write_grid_csv, write_grid_json
from .plots import plot_grid, plot_trajectory
from .stl import evaluate
from .systems import instantiate

__all__ = ["main"]


def _out_dir(args, configured: Path | None) -> Path | None:
    if args.out is not None:
        return Path(args.out)
    return configured


def cmd_falsify(args: argparse.Namespace) -> int:
    cfg = load_falsify_config(args.config)
    reports = run_campaign(cfg, jobs=args.jobs, seed_offset=args.seed_offset)
    for report in reports:
        if report.best is None:
            outcome = "no violation found"
        elif report.mode == "any-violation":
            outcome = f"best gamma {report.best.gamma:.4g}"
        else:
            outcome = f"best distance {report.best.distance:.4f}"
        print(
            f"{report.plant_id} / {report.optimizer} / seed {report.seed}: "
            f"{report.violations}/{report.total_samples} violations, {outcome} "
            f"({report.wall_clock_s:.1f}s)"
        )
    print()
    print(format_summary_table(reports), end="")
    out = _out_dir(args, cfg.output_dir)
    written = export_campaign(reports, out)
    print(f"\nwrote {len(written)} files to {out}")
    return 0


def cmd_gridscan(args: argparse.Namespace) -> int:
    cfg = load_gridscan_config(args.config)
    result = scan(
        cfg.plant,
        spec=cfg.spec_text,
        domain=cfg.domain,
        resolution=cfg.resolution,
        lower_budget=cfg.lower_budget,
        seed=cfg.seed + args.seed_offset,
        overrides=cfg.overrides,
        jobs=args.jobs,
    )
    violating = [c for c in result.cells if c.gamma < 0]
    worst = min(result.cells, key=lambda c: (c.gamma, c.index))
    print(
        f"{result.plant_id}: {len(violating)}/{len(result.cells)} cells violate "
        f"{result.spec_text!r}"
    )
    print(
        f"worst cell: gamma {worst.gamma:.4g} at "
        f"({result.domain.names[0]}={worst.deviation[0]:.4g}, "
        f"{result.domain.names[1]}={worst.deviation[1]:.4g})"
    )
    out = _out_dir(args, cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_grid_csv(result, out / "grid.csv")
    write_grid_json(result, out / "grid.json")
    plot_grid(result, out / "grid.png")
    print(f"wrote grid.csv, grid.json, grid.png to {out}")
    return 0


def _write_trajectory_csv(signal, path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("time",) + signal.channels)
        for i, row in enumerate(signal.samples):
            writer.writerow([repr(i * signal.dt)] + [repr(float(v)) for v in row])


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = load_eval_config(args.config)
    instance = instantiate(cfg.plant, cfg.delta, overrides=cfg.overrides)
    trajectory = instance.simulate(cfg.scenario)
    gamma = evaluate(cfg.formula, trajectory.signal, 0)
    verdict = "SATISFIED" if gamma >= 0 else "VIOLATED"
    names = cfg.plant.deviations.names
    print(f"plant:    {cfg.plant.plant_id}")
    print(f"spec:     {cfg.spec_text}")
    print(
        "deviation: "
        + ", ".join(f"{n}={v:.6g}" for n, v in zip(names, cfg.delta))
    )
    print(f"robustness: {gamma!r}  ->  {verdict}")
    out = _out_dir(args, cfg.output_dir)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        payload = {
            "plant": cfg.plant.plant_id,
            "spec": cfg.spec_text,
            "deviation": {n: float(v) for n, v in zip(names, cfg.delta)},
            "scenario": {
                n: float(v) for n, v in zip(cfg.plant.scenario.names, cfg.scenario)
            },
            "gamma": gamma,
            "satisfied": gamma >= 0,
        }
        (out / "eval.json").write_text(json.dumps(payload, indent=2) + "\n")
        _write_trajectory_csv(trajectory.signal, out / "trajectory.csv")
        plot_trajectory(
            trajectory.signal,
            out / "trajectory.png",
            title=f"{cfg.plant.plant_id}: {verdict.lower()} (gamma={gamma:.4g})",
        )
        print(f"wrote eval.json, trajectory.csv, trajectory.png to {out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="devfal",
        description="quantify how much plant deviation a control specification survives",
    )
    parser.add_argument("--version", action="version", version=f"devfal {version('devfal')}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, seeds: bool = True, jobs: bool = True):
        p.add_argument("config", type=Path, help="JSON config file")
        p.add_argument("--out", type=Path, default=None, help="output directory (overrides config)")
        if seeds:
            p.add_argument(
                "--seed-offset",
                type=int,
                default=0,
                help="added to every configured seed, for fresh repetitions",
            )
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="parallel workers")

    p_falsify = sub.add_parser("falsify", help="run a falsification campaign")
    common(p_falsify)
    p_falsify.set_defaults(handler=cmd_falsify)

    p_grid = sub.add_parser("gridscan", help="exhaustive 2-dim deviation sweep")
    common(p_grid)
    p_grid.set_defaults(handler=cmd_gridscan)

    p_eval = sub.add_parser("eval", help="score a single deviation/scenario rollout")
    common(p_eval, seeds=False, jobs=False)
    p_eval.set_defaults(handler=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - boundary: report and set exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
