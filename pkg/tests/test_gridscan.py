"""Exhaustive deviation-grid sweeps."""

import csv
import json

import numpy as np
import pytest

from devfal.falsifier import BLOWUP_GAMMA, derive_seed, lower_falsify
from devfal.gridscan import scan, write_grid_csv, write_grid_json
from devfal.stl import parse
from devfal.systems import get_plant, instantiate


class TestScan:
    def test_default_resolution_yields_400_cells(self):
        result = scan("linear-safe", lower_budget=1)
        assert result.resolution == 20
        assert len(result.cells) == 400
        assert result.gamma_matrix().shape == (20, 20)

    def test_cell_centers_row_major(self):
        result = scan("linear-safe", resolution=2, lower_budget=1)
        assert [c.deviation for c in result.cells] == [
            (0.25, 0.25),
            (0.25, 0.75),
            (0.75, 0.25),
            (0.75, 0.75),
        ]
        assert [c.index for c in result.cells] == [0, 1, 2, 3]

    def test_resolution_one_is_box_center(self):
        result = scan("linear-safe", resolution=1, lower_budget=1)
        assert result.cells[0].deviation == (0.5, 0.5)

    def test_linear_safe_matches_analytic_sign(self):
        result = scan("linear-safe", resolution=10, lower_budget=1)
        for cell in result.cells:
            expected = 1.0 - cell.deviation[0] - cell.deviation[1]
            assert cell.gamma == pytest.approx(expected, abs=1e-12)
            assert (cell.gamma < 0) == (expected < 0)

    def test_gamma_matrix_layout(self):
        result = scan("linear-safe", resolution=3, lower_budget=1)
        matrix = result.gamma_matrix()
        for cell in result.cells:
            assert matrix[cell.index // 3, cell.index % 3] == cell.gamma

    def test_cells_agree_with_lower_falsify_seeding(self):
        plant = get_plant("watertank")
        phi = parse(plant.default_spec)
        result = scan(plant, resolution=2, lower_budget=3, seed=11)
        for cell in result.cells:
            again = lower_falsify(
                instantiate(plant, np.array(cell.deviation)),
                phi,
                budget=3,
                seed=derive_seed(11, cell.index),
            )
            assert again.gamma == cell.gamma
            assert again.evaluations == cell.evaluations

    def test_jobs_do_not_change_cells(self):
        serial = scan("linear-safe", resolution=5, lower_budget=1, jobs=1)
        parallel = scan("linear-safe", resolution=5, lower_budget=1, jobs=2)
        assert [(c.deviation, c.gamma) for c in serial.cells] == [
            (c.deviation, c.gamma) for c in parallel.cells
        ]

    def test_requires_two_dimensions(self):
        with pytest.raises(ValueError):
            scan("cartpole4", lower_budget=1)

    def test_bad_spec_fails_before_simulating(self):
        with pytest.raises(Exception):
            scan("linear-safe", spec="c >", lower_budget=1)

    def test_blowup_cells_carry_sentinel(self):
        result = scan(
            "cartpole", resolution=2, lower_budget=2, overrides={"dt": 50.0}
        )
        assert all(c.blowup for c in result.cells)
        assert all(c.gamma == BLOWUP_GAMMA for c in result.cells)


class TestGridArtifacts:
    def test_csv_layout_and_roundtrip(self, tmp_path):
        result = scan("linear-safe", resolution=4, lower_budget=1)
        path = tmp_path / "grid.csv"
        write_grid_csv(result, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "dev1,dev2,gamma,evals"
        assert len(lines) == 1 + 16
        with path.open() as fh:
            rows = list(csv.DictReader(fh))
        for row, cell in zip(rows, result.cells):
            assert float(row["dev1"]) == cell.deviation[0]
            assert float(row["gamma"]) == cell.gamma
            assert int(row["evals"]) == cell.evaluations

    def test_json_document(self, tmp_path):
        result = scan("linear-safe", resolution=2, lower_budget=1, seed=9)
        path = tmp_path / "grid.json"
        write_grid_json(result, path)
        doc = json.loads(path.read_text())
        assert doc["plant"] == "linear-safe"
        assert doc["resolution"] == 2
        assert doc["seed"] == 9
        assert len(doc["cells"]) == 4
        assert doc["cells"][0]["gamma"] == result.cells[0].gamma

    def test_export_byte_identical(self, tmp_path):
        blobs = []
        for name in ("a", "b"):
            result = scan("linear-safe", resolution=3, lower_budget=2, seed=1)
            path = tmp_path / f"{name}.csv"
            write_grid_csv(result, path)
            blobs.append(path.read_bytes())
        assert blobs[0] == blobs[1]
