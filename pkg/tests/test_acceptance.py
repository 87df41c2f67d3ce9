"""Acceptance gate: nine end-to-end checks, one PASS/FAIL line each.

Run with `pytest -v tests/test_acceptance.py -s` to see the lines as they
complete.  Each check states its tolerance inline; timings are asserted
against generous wall-clock ceilings.
"""

import csv
import json
import statistics
import time

import numpy as np

from devfal.cli import main
from devfal.falsifier import falsify, lower_falsify, make_problem
from devfal.gridscan import scan, write_grid_csv
from devfal.optimizers import SearchBox, make_optimizer
from devfal.stl import Always, Eventually, Interval, Not, Predicate, Until
from devfal.stl import Const, evaluate, evaluate_reference, parse
from devfal.systems import (
    DeviationDimension,
    DeviationDomain,
    Signal,
    get_plant,
    instantiate,
)
from formula_corpus import random_formula, signal_for


def report(number: int, name: str, ok: bool) -> bool:
    print(f"criterion {number} ({name}): {'PASS' if ok else 'FAIL'}")
    return ok


def test_criterion_1_worked_stl_example():
    signal = Signal(dt=1.0, channels=("s",), samples=np.full((3, 1), 5.0))
    rho = evaluate(parse("s - 3 > 0"), signal, 0)
    assert report(1, "STL worked example rho = 2", rho == 2.0)


def test_criterion_2_oracle_equivalence_and_dualities():
    started = time.perf_counter()
    rng = np.random.default_rng(20240201)
    names = ("s", "q")
    top = Predicate(Const(1.0e9))
    worst = 0.0
    for _ in range(200):
        phi = random_formula(rng, names, depth=4)
        wrapped = Eventually(Interval(0.0, 2.0), phi)
        signal = signal_for(rng, wrapped, names)
        fast = evaluate(phi, signal, 0)
        slow = evaluate_reference(phi, signal, 0)
        worst = max(worst, abs(fast - slow))
        # negation duality, exact
        assert evaluate(Not(phi), signal, 0) == -fast
        # derived operators: F == TRUE-until and F == not-G-not, exact
        ev = evaluate(wrapped, signal, 0)
        assert evaluate(Until(Interval(0.0, 2.0), top, phi), signal, 0) == ev
        assert evaluate(Not(Always(Interval(0.0, 2.0), Not(phi))), signal, 0) == ev
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-9 and elapsed < 30.0
    assert report(
        2, f"oracle agreement (worst {worst:.2e}, {elapsed:.1f}s)", ok
    )


def test_criterion_3_cartpole_force_flip():
    started = time.perf_counter()
    plant = get_plant("cartpole")
    phi = parse(plant.default_spec)
    nominal = lower_falsify(
        instantiate(plant, np.array([1.0, 10.0])), phi, budget=100, seed=0
    )
    deviated = lower_falsify(
        instantiate(plant, np.array([1.0, 20.0])), phi, budget=100, seed=0
    )
    elapsed = time.perf_counter() - started
    ok = nominal.gamma >= 0.0 and deviated.gamma < 0.0 and elapsed < 120.0
    assert report(
        3,
        f"cart-pole flip (gamma {nominal.gamma:.3f} at F=10, "
        f"{deviated.gamma:.3f} at F=20, {elapsed:.1f}s)",
        ok,
    )


def test_criterion_4_analytic_minimum_distance():
    started = time.perf_counter()
    target = 1.0 / np.sqrt(2.0)
    hits = 0
    bests = []
    for seed in (0, 1, 2):
        problem = make_problem(
            "linear-safe",
            mode="min-violation",
            upper_budget=100,
            lower_budget=1,
            seed=seed,
        )
        best = falsify(problem, "cma-es").best
        bests.append(best.distance if best else float("inf"))
        if best is not None and abs(best.distance - target) <= 0.1 * target:
            hits += 1
    elapsed = time.perf_counter() - started
    ok = hits >= 2 and elapsed < 60.0
    assert report(
        4,
        f"analytic minimum 0.7071 (bests {', '.join(f'{b:.4f}' for b in bests)}, "
        f"{hits}/3 within 10%, {elapsed:.1f}s)",
        ok,
    )


def test_criterion_5_robust_region_reports_zero():
    started = time.perf_counter()
    domain = DeviationDomain(
        (
            DeviationDimension("d1", 0.0, 0.4, 0.0),
            DeviationDimension("d2", 0.0, 0.4, 0.0),
        )
    )
    counts = {}
    for kind in ("cma-es", "random"):
        problem = make_problem(
            "linear-safe", domain=domain, upper_budget=100, lower_budget=1, seed=0
        )
        result = falsify(problem, kind)
        counts[kind] = (result.violations, result.total_samples)
    elapsed = time.perf_counter() - started
    ok = all(v == (0, 100) for v in counts.values()) and elapsed < 60.0
    assert report(
        5,
        f"robust region 0/100 (cma-es {counts['cma-es'][0]}/100, "
        f"random {counts['random'][0]}/100, {elapsed:.1f}s)",
        ok,
    )


def test_criterion_6_cma_beats_random_on_violation_distance():
    started = time.perf_counter()
    seeds = (0, 1, 2)
    wins = 0
    enough_violations = True
    details = []
    for plant_id in ("cartpole", "watertank"):
        stats = {}
        for kind in ("cma-es", "random"):
            pooled, bests, runs_with_hits = [], [], 0
            for seed in seeds:
                problem = make_problem(
                    plant_id,
                    mode="min-violation",
                    upper_budget=100,
                    lower_budget=50,
                    seed=seed,
                )
                run = falsify(problem, kind)
                found = run.violating_distances
                if found:
                    runs_with_hits += 1
                    pooled.extend(found)
                    bests.append(run.best.distance)
            stats[kind] = (
                statistics.mean(pooled) if pooled else float("inf"),
                statistics.mean(bests) if bests else float("inf"),
            )
            if runs_with_hits < 2:  # need >= 1 violation on >= 2 of 3 seeds
                enough_violations = False
        for aggregate in (0, 1):
            if stats["cma-es"][aggregate] < stats["random"][aggregate]:
                wins += 1
        details.append(
            f"{plant_id} pooled {stats['cma-es'][0]:.3f}|{stats['random'][0]:.3f} "
            f"best {stats['cma-es'][1]:.3f}|{stats['random'][1]:.3f}"
        )
    elapsed = time.perf_counter() - started
    ok = wins >= 3 and enough_violations and elapsed < 1800.0
    assert report(
        6,
        f"distance trend cma-es|random: {'; '.join(details)}; "
        f"{wins}/4 wins, {elapsed:.0f}s",
        ok,
    )


def test_criterion_7_grid_accounting_and_analytic_signs(tmp_path):
    default = scan("linear-safe", lower_budget=1)
    path = tmp_path / "grid.csv"
    write_grid_csv(default, path)
    data_rows = len(path.read_text().splitlines()) - 1
    fine = scan("linear-safe", resolution=10, lower_budget=1)
    signs_match = True
    for cell in fine.cells:
        margin = 1.0 - (cell.deviation[0] + cell.deviation[1])
        if abs(margin) <= 1e-9:  # on the boundary gamma is analytically zero
            signs_match &= abs(cell.gamma) <= 1e-9
        else:
            signs_match &= (cell.gamma < 0) == (margin < 0)
    ok = data_rows == 400 and signs_match
    assert report(
        7, f"grid accounting (400 rows: {data_rows == 400}, signs: {signs_match})", ok
    )


def test_criterion_8_byte_identical_artifacts(tmp_path):
    config = tmp_path / "campaign.json"
    config.write_text(
        json.dumps(
            {
                "plant": "linear-safe",
                "optimizers": ["cma-es", "random"],
                "seeds": [0, 1],
                "upper_budget": 30,
                "lower_budget": 1,
            }
        )
    )
    grid_config = tmp_path / "grid.json"
    grid_config.write_text(
        json.dumps({"plant": "linear-safe", "resolution": 5, "lower_budget": 2})
    )
    trees = []
    for label, jobs in (("a", 1), ("b", 3)):
        fdir, gdir = tmp_path / f"f_{label}", tmp_path / f"g_{label}"
        assert main(["falsify", str(config), "--out", str(fdir), "--jobs", str(jobs)]) == 0
        assert main(["gridscan", str(grid_config), "--out", str(gdir), "--jobs", str(jobs)]) == 0
        trees.append(
            {p.name: p.read_bytes() for d in (fdir, gdir) for p in sorted(d.iterdir())}
        )
    ok = trees[0] == trees[1]
    assert report(8, f"byte-identical artifacts across --jobs ({len(trees[0])} files)", ok)


def test_criterion_9_cma_sanity_on_sphere():
    center = np.full(4, 0.7)
    box = SearchBox((0.0,) * 4, (1.0,) * 4)
    bests = {"cma-es": [], "random": []}
    for kind in bests:
        for seed in range(5):
            opt = make_optimizer(kind, box, seed, 100)
            while opt.remaining > 0:
                batch = opt.ask()
                opt.tell(batch, [float(np.sum((x - center) ** 2)) for x in batch])
            bests[kind].append(opt.best.value)
    cma_median = statistics.median(bests["cma-es"])
    rand_median = statistics.median(bests["random"])
    ok = cma_median < rand_median and min(bests["cma-es"]) < 1e-2
    assert report(
        9,
        f"sphere sanity (cma median {cma_median:.2e} < random {rand_median:.2e}, "
        f"best {min(bests['cma-es']):.2e})",
        ok,
    )
