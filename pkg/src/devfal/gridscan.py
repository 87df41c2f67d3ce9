"""Exhaustive robustness map over a two-dimensional deviation box.

The box is split into resolution x resolution equal cells; the lower-layer
scenario search runs once per cell center with a seed derived from (base
seed, cell index), so any cell can be recomputed in isolation and a scan is
reproducible cell by cell.  Cells are ordered row-major: the first dimension
is the slow axis.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .falsifier import derive_seed, lower_falsify
from .stl import parse
from .systems import DeviationDomain, Plant, get_plant, instantiate

__all__ = ["GridCell", "GridScan", "scan", "write_grid_csv", "write_grid_json"]

DEFAULT_RESOLUTION = 20


@dataclass(frozen=True)
class GridCell:
    """Lower-layer outcome at one cell center."""

    index: int  # row-major position
    deviation: tuple[float, float]
    gamma: float
    evaluations: int
    blowup: bool = False


@dataclass(frozen=True, eq=False)
class GridScan:
    """All cells of one scan plus the settings that produced them."""

    plant_id: str
    spec_text: str
    domain: DeviationDomain
    resolution: int
    lower_budget: int
    seed: int
    cells: tuple[GridCell, ...]

    def gamma_matrix(self) -> np.ndarray:
        """Gamma values as (resolution, resolution), first dimension as rows."""
        values = np.array([c.gamma for c in self.cells])
        return values.reshape(self.resolution, self.resolution)


def _cell_centers(domain: DeviationDomain, resolution: int) -> list[tuple[float, float]]:
    lo, hi = domain.lower, domain.upper
    steps = (hi - lo) / resolution
    axes = [lo[d] + (np.arange(resolution) + 0.5) * steps[d] for d in (0, 1)]
    return [(float(a), float(b)) for a in axes[0] for b in axes[1]]


def _scan_cell(args) -> GridCell:
    plant_id, spec_text, domain, overrides, budget, seed, index, center = args
    inst = instantiate(get_plant(plant_id), center, domain=domain, overrides=overrides)
    result = lower_falsify(inst, parse(spec_text), budget, derive_seed(seed, index))
    return GridCell(
        index=index,
        deviation=center,
        gamma=result.gamma,
        evaluations=result.evaluations,
        blowup=result.blowup,
    )


def scan(
    plant: Plant | str,
    spec: str | None = None,
    domain: DeviationDomain | None = None,
    resolution: int = DEFAULT_RESOLUTION,
    lower_budget: int = 50,
    seed: int = 0,
    overrides: Mapping[str, float] | None = None,
    jobs: int = 1,
) -> GridScan:
    """Score every cell center of a 2-dim deviation box.

    Only defined for two-dimensional domains.  With jobs > 1 cells are scored
    in worker processes; results are reassembled in cell order, so the output
    is identical to a serial scan.
    """
    if isinstance(plant, str):
        plant = get_plant(plant)
    domain = domain or plant.deviations
    if domain.dimension != 2:
        raise ValueError(
            f"grid scan needs a 2-dim deviation domain, got {domain.dimension} "
            f"({', '.join(domain.names)})"
        )
    if resolution < 1:
        raise ValueError(f"resolution must be at least 1, got {resolution}")
    spec_text = spec if spec is not None else plant.default_spec
    parse(spec_text)  # fail fast on malformed input

    tasks = [
        (plant.plant_id, spec_text, domain, overrides, lower_budget, seed, i, center)
        for i, center in enumerate(_cell_centers(domain, resolution))
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = tuple(pool.map(_scan_cell, tasks, chunksize=8))
    else:
        cells = tuple(_scan_cell(t) for t in tasks)
    return GridScan(
        plant_id=plant.plant_id,
        spec_text=spec_text,
        domain=domain,
        resolution=resolution,
        lower_budget=lower_budget,
        seed=seed,
        cells=cells,
    )


def write_grid_csv(result: GridScan, path: Path | str) -> None:
    """One data row per cell, row-major, deviation values then gamma and evals."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dev1", "dev2", "gamma", "evals"])
        for cell in result.cells:
            writer.writerow(
                [
                    repr(cell.deviation[0]),
                    repr(cell.deviation[1]),
                    repr(cell.gamma),
                    cell.evaluations,
                ]
            )


def write_grid_json(result: GridScan, path: Path | str) -> None:
    payload = {
        "plant": result.plant_id,
        "spec": result.spec_text,
        "domain": {
            "names": list(result.domain.names),
            "lower": result.domain.lower.tolist(),
            "upper": result.domain.upper.tolist(),
            "nominal": result.domain.nominal.tolist(),
        },
        "resolution": result.resolution,
        "lower_budget": result.lower_budget,
        "seed": result.seed,
        "cells": [
            {
                "index": c.index,
                "dev1": c.deviation[0],
                "dev2": c.deviation[1],
                "gamma": c.gamma,
                "evals": c.evaluations,
            }
            for c in result.cells
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
