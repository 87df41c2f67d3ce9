"""Run an (optimizer x seed) study from one config and write its artifacts.

A campaign is the cross product of the configured optimizers and seeds, each
cell being one full falsification run.  Runs are independent, so with
jobs > 1 they execute in separate processes; results are collected in the
declared order either way, and every artifact is a pure function of the
config, keeping re-runs byte-identical.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import FalsifyConfig
from .falsifier import (
    FalsificationProblem,
    FalsificationReport,
    falsify,
    write_log_csv,
    write_report_json,
)
from .plots import plot_samples

__all__ = [
    "build_problems",
    "run_campaign",
    "summary_rows",
    "format_summary_table",
    "write_summary_csv",
    "write_summary_txt",
    "export_campaign",
]

SUMMARY_COLUMNS = (
    "plant",
    "optimizer",
    "seed",
    "total_samples",
    "violations",
    "blowups",
    "gamma_min",
    "dist_mean",
    "dist_std",
    "dist_min",
    "dist_max",
    "best_distance",
)


def build_problems(
    cfg: FalsifyConfig, seed_offset: int = 0
) -> list[tuple[str, FalsificationProblem]]:
    """One (optimizer, problem) pair per campaign cell, in declared order."""
    base = FalsificationProblem(
        plant=cfg.plant,
        formula=cfg.formula,
        spec_text=cfg.spec_text,
        domain=cfg.domain,
        mode=cfg.mode,
        upper_budget=cfg.upper_budget,
        lower_budget=cfg.lower_budget,
        distance_order=cfg.distance_order,
        overrides=cfg.overrides,
    )
    return [
        (kind, base.with_seed(seed + seed_offset))
        for kind in cfg.optimizers
        for seed in cfg.seeds
    ]


def _run_cell(args: tuple[str, FalsificationProblem]) -> FalsificationReport:
    kind, problem = args
    return falsify(problem, kind)


def run_campaign(
    cfg: FalsifyConfig, jobs: int = 1, seed_offset: int = 0
) -> list[FalsificationReport]:
    """Execute every campaign cell; reports come back in declared order."""
    cells = build_problems(cfg, seed_offset)
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(cells))) as pool:
            return list(pool.map(_run_cell, cells))
    if len(cells) == 1:
        # single cell: spend the workers inside the run instead
        kind, problem = cells[0]
        return [falsify(problem, kind, jobs=jobs)]
    return [_run_cell(cell) for cell in cells]


def summary_rows(reports: list[FalsificationReport]) -> list[dict]:
    """Per-run aggregate statistics over the violating samples.

    Distance fields are empty strings when a run found no violation, which
    keeps the CSV rectangular without inventing placeholder numbers.
    """
    rows = []
    for report in reports:
        found = report.violating_distances
        row = {
            "plant": report.plant_id,
            "optimizer": report.optimizer,
            "seed": report.seed,
            "total_samples": report.total_samples,
            "violations": report.violations,
            "blowups": len(report.blowup_indices),
            "gamma_min": min(s.gamma for s in report.samples),
            "dist_mean": "",
            "dist_std": "",
            "dist_min": "",
            "dist_max": "",
            "best_distance": "",
        }
        if found:
            mean = sum(found) / len(found)
            row["dist_mean"] = mean
            row["dist_std"] = math.sqrt(
                sum((d - mean) ** 2 for d in found) / len(found)
            )
            row["dist_min"] = min(found)
            row["dist_max"] = max(found)
            row["best_distance"] = report.best.distance
        rows.append(row)
    return rows


def _cell_text(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_summary_csv(reports: list[FalsificationReport], path: Path | str) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for row in summary_rows(reports):
            writer.writerow([_cell_text(row[c]) for c in SUMMARY_COLUMNS])


def format_summary_table(reports: list[FalsificationReport]) -> str:
    """Fixed-width table of the same rows the CSV carries."""
    header = (
        f"{'plant':<12} {'optimizer':<9} {'seed':>4} {'viol':>9} "
        f"{'distance mean+-std':>20} {'range':>18} {'best':>8}"
    )
    lines = [header, "-" * len(header)]
    for row in summary_rows(reports):
        if row["violations"]:
            spread = f"{row['dist_mean']:.4f}+-{row['dist_std']:.4f}"
            span = f"[{row['dist_min']:.4f}, {row['dist_max']:.4f}]"
            best = f"{row['best_distance']:.4f}"
        else:
            spread, span, best = "-", "-", "-"
        lines.append(
            f"{row['plant']:<12} {row['optimizer']:<9} {row['seed']:>4} "
            f"{row['violations']:>4}/{row['total_samples']:<4} "
            f"{spread:>20} {span:>18} {best:>8}"
        )
    return "\n".join(lines) + "\n"


def write_summary_txt(reports: list[FalsificationReport], path: Path | str) -> None:
    Path(path).write_text(format_summary_table(reports))


def export_campaign(
    reports: list[FalsificationReport], out_dir: Path | str
) -> list[Path]:
    """Write per-run report/log/figure plus the campaign summary pair."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for report in reports:
        stem = f"{report.optimizer}_{report.seed}"
        report_path = out / f"report_{stem}.json"
        write_report_json(report, report_path)
        written.append(report_path)
        log_path = out / f"log_{stem}.csv"
        write_log_csv(report, log_path)
        written.append(log_path)
        figure_path = out / f"samples_{stem}.png"
        if plot_samples(report, figure_path):
            written.append(figure_path)
    csv_path = out / "summary.csv"
    write_summary_csv(reports, csv_path)
    written.append(csv_path)
    txt_path = out / "summary.txt"
    write_summary_txt(reports, txt_path)
    written.append(txt_path)
    return written
