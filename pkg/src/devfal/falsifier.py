"""Two-layer falsification of deviation robustness.

The upper layer searches the deviation box with a budgeted ask/tell
optimizer.  Each candidate deviation is scored by the lower layer, which
instantiates the plant at that deviation and searches the scenario space for
the worst satisfaction value gamma of the requirement; the candidate's
objective then depends on the campaign mode:

* any-violation: the objective is gamma itself, driving straight toward any
  requirement violation regardless of where it lies in the box.
* min-violation: violating candidates score their normalized distance from
  the nominal deviation, satisfying ones score D_max + gamma, where D_max is
  the diameter of the normalized box under the chosen norm.  Every violation
  therefore outranks every non-violation, and among non-violations a smaller
  gamma (closer to the boundary) is preferred.

The lower layer always spends its full budget and returns the minimum found,
not the first negative value: the falsifier estimates worst-case robustness,
not mere reachability of a violation.  A simulation blow-up short-circuits to
the sentinel gamma of -1e6 with the aborting scenario as witness.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, replace
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Mapping

import numpy as np

from .optimizers import SearchBox, make_optimizer
from .stl import Formula, evaluate, parse, to_text
from .systems import (
    DeviationDomain,
    Plant,
    SimulationBlowupError,
    SystemInstance,
    get_plant,
    instantiate,
)

__all__ = [
    "MODES",
    "BLOWUP_GAMMA",
    "FalsificationProblem",
    "LowerResult",
    "SampleRecord",
    "FalsificationReport",
    "make_problem",
    "normalize",
    "distance",
    "objective",
    "derive_seed",
    "lower_falsify",
    "falsify",
    "write_report_json",
    "write_log_csv",
    "LOG_FIXED_COLUMNS",
]

MODES = ("any-violation", "min-violation")

# gamma reported for a candidate whose simulation produced non-finite state;
# far below any reachable satisfaction value, so it always counts as violating
BLOWUP_GAMMA = -1.0e6


# ---------------------------------------------------------------------------
# geometry of the deviation box
# ---------------------------------------------------------------------------


def normalize(delta, domain: DeviationDomain) -> np.ndarray:
    """Map a deviation into the unit box ([0,1] per dimension)."""
    delta = np.asarray(delta, dtype=float)
    return (delta - domain.lower) / (domain.upper - domain.lower)


def distance(delta, domain: DeviationDomain, p: float = 2.0) -> float:
    """Norm-p distance between normalized delta and the normalized nominal."""
    diff = normalize(delta, domain) - normalize(domain.nominal, domain)
    return float(np.linalg.norm(diff, ord=p))


def _diameter(dimension: int, p: float) -> float:
    # largest possible normalized distance: ||(1,...,1)||_p
    if np.isinf(p):
        return 1.0
    return float(dimension ** (1.0 / p))


def objective(
    gamma: float, delta, domain: DeviationDomain, mode: str, p: float = 2.0
) -> float:
    """Upper-layer objective value for one scored candidate (lower is better)."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    if mode == "any-violation":
        return float(gamma)
    if gamma < 0:
        return distance(delta, domain, p)
    return _diameter(domain.dimension, p) + float(gamma)


def derive_seed(base: int, index: int) -> int:
    """Stable per-candidate seed; independent of platform and run order."""
    return int(np.random.SeedSequence([int(base), int(index)]).generate_state(1)[0])


# ---------------------------------------------------------------------------
# problem definition
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FalsificationProblem:
    """Everything falsify() needs except the choice of upper-layer optimizer."""

    plant: Plant
    formula: Formula = field(repr=False)
    spec_text: str
    domain: DeviationDomain
    mode: str = "min-violation"
    upper_budget: int = 100
    lower_budget: int = 50
    distance_order: float = 2.0
    seed: int = 0
    overrides: Mapping[str, float] | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.upper_budget < 1 or self.lower_budget < 1:
            raise ValueError("budgets must be at least 1")

    def with_seed(self, seed: int) -> "FalsificationProblem":
        return replace(self, seed=int(seed))


def make_problem(
    plant: Plant | str,
    spec: str | None = None,
    domain: DeviationDomain | None = None,
    mode: str = "min-violation",
    upper_budget: int = 100,
    lower_budget: int = 50,
    distance_order: float = 2.0,
    seed: int = 0,
    overrides: Mapping[str, float] | None = None,
) -> FalsificationProblem:
    """Resolve plant id, requirement text, and domain into a problem."""
    if isinstance(plant, str):
        plant = get_plant(plant)
    spec_text = spec if spec is not None else plant.default_spec
    return FalsificationProblem(
        plant=plant,
        formula=parse(spec_text),
        spec_text=spec_text,
        domain=domain or plant.deviations,
        mode=mode,
        upper_budget=upper_budget,
        lower_budget=lower_budget,
        distance_order=distance_order,
        seed=seed,
        overrides=overrides,
    )


# ---------------------------------------------------------------------------
# lower layer: worst-case scenario search for a fixed deviation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LowerResult:
    """Worst satisfaction value found over the scenario space."""

    gamma: float
    scenario: np.ndarray  # witness achieving gamma
    evaluations: int
    blowup: bool = False


def lower_falsify(
    instance: SystemInstance,
    formula: Formula,
    budget: int,
    seed: int,
) -> LowerResult:
    """Estimate min_scenario rho(formula, trajectory, 0) with CMA-ES.

    Spends the whole budget and returns the minimum observed, with the
    scenario that achieved it.  Ties keep the earliest-seen scenario.
    Simulations that blow up enter the search as the sentinel gamma -1e6.
    """
    space = instance.plant.scenario
    box = SearchBox(tuple(space.lower), tuple(space.upper))
    opt = make_optimizer("cma-es", box, seed, budget)

    def score(scenario: np.ndarray) -> tuple[float, bool]:
        try:
            trajectory = instance.simulate(scenario)
        except SimulationBlowupError:
            return BLOWUP_GAMMA, True
        return evaluate(formula, trajectory.signal, 0), False

    best: tuple[float, np.ndarray, bool] | None = None
    while opt.remaining > 0:
        batch = opt.ask()
        scored = [score(x) for x in batch]
        for x, (gamma, blown) in zip(batch, scored):
            if best is None or gamma < best[0]:
                best = (gamma, x.copy(), blown)
        opt.tell(batch, [g for g, _ in scored])
    assert best is not None
    return LowerResult(
        gamma=float(best[0]),
        scenario=best[1],
        evaluations=opt.asked,
        blowup=best[2],
    )


# ---------------------------------------------------------------------------
# upper layer
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampleRecord:
    """One scored deviation, in ask order.

    scenario is the lower layer's witness: re-simulating (deviation, scenario)
    reproduces the trajectory that achieved gamma.
    """

    index: int
    deviation: np.ndarray
    gamma: float
    objective: float
    distance: float
    is_violation: bool
    lower_evals: int
    blowup: bool = False
    scenario: np.ndarray | None = None


@dataclass(eq=False)
class FalsificationReport:
    """Outcome of one falsification run, with the full sample log.

    best is the mode's winner: in any-violation mode the lowest-gamma sample
    provided it violates, in min-violation mode the closest violating sample.
    None when the run found no violation.  wall_clock_s is informational and
    deliberately kept out of the JSON artifact so that re-runs are
    byte-identical.
    """

    plant_id: str
    optimizer: str
    mode: str
    seed: int
    spec_text: str
    upper_budget: int
    lower_budget: int
    distance_order: float
    domain: DeviationDomain
    samples: list[SampleRecord]
    best: SampleRecord | None
    wall_clock_s: float = 0.0

    @property
    def total_samples(self) -> int:
        return len(self.samples)

    @property
    def violations(self) -> int:
        return sum(1 for s in self.samples if s.is_violation)

    @property
    def blowup_indices(self) -> list[int]:
        return [s.index for s in self.samples if s.blowup]

    @property
    def violating_distances(self) -> list[float]:
        return [s.distance for s in self.samples if s.is_violation]


def _pick_best(samples: list[SampleRecord], mode: str) -> SampleRecord | None:
    violating = [s for s in samples if s.is_violation]
    if not violating:
        return None
    if mode == "any-violation":
        return min(violating, key=lambda s: (s.gamma, s.index))
    return min(violating, key=lambda s: (s.distance, s.index))


def falsify(
    problem: FalsificationProblem, optimizer_kind: str, jobs: int = 1
) -> FalsificationReport:
    """Run the two-layer search and log every scored deviation.

    The sample log is in ask order and scoring is a pure function of
    (problem, candidate index), so the report is identical for any jobs
    count; jobs > 1 only evaluates candidates of one generation in parallel.
    """
    box = SearchBox(tuple(problem.domain.lower), tuple(problem.domain.upper))
    opt = make_optimizer(optimizer_kind, box, problem.seed, problem.upper_budget)

    def score(args: tuple[int, np.ndarray]) -> SampleRecord:
        index, delta = args
        inst = instantiate(
            problem.plant, delta, domain=problem.domain, overrides=problem.overrides
        )
        lower = lower_falsify(
            inst, problem.formula, problem.lower_budget, derive_seed(problem.seed, index)
        )
        return SampleRecord(
            index=index,
            deviation=delta,
            gamma=lower.gamma,
            objective=objective(
                lower.gamma, delta, problem.domain, problem.mode, problem.distance_order
            ),
            distance=distance(delta, problem.domain, problem.distance_order),
            is_violation=lower.gamma < 0,
            lower_evals=lower.evaluations,
            blowup=lower.blowup,
            scenario=lower.scenario,
        )

    started = time.perf_counter()
    samples: list[SampleRecord] = []
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        while opt.remaining > 0:
            batch = opt.ask()
            tasks = list(enumerate(batch, start=len(samples)))
            if pool is None:
                records = [score(t) for t in tasks]
            else:
                records = list(pool.map(score, tasks))
            opt.tell(batch, [r.objective for r in records])
            samples.extend(records)
    finally:
        if pool is not None:
            pool.shutdown()

    return FalsificationReport(
        plant_id=problem.plant.plant_id,
        optimizer=optimizer_kind,
        mode=problem.mode,
        seed=problem.seed,
        spec_text=problem.spec_text,
        upper_budget=problem.upper_budget,
        lower_budget=problem.lower_budget,
        distance_order=problem.distance_order,
        domain=problem.domain,
        samples=samples,
        best=_pick_best(samples, problem.mode),
        wall_clock_s=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------

LOG_FIXED_COLUMNS = ("gamma", "objective", "distance", "is_violation", "lower_evals")


def _sample_dict(record: SampleRecord, names: tuple[str, ...]) -> dict:
    return {
        "index": record.index,
        "deviation": {n: float(v) for n, v in zip(names, record.deviation)},
        "gamma": record.gamma,
        "objective": record.objective,
        "distance": record.distance,
        "is_violation": record.is_violation,
        "lower_evals": record.lower_evals,
    }


def report_to_dict(report: FalsificationReport) -> dict:
    """JSON-ready view of the report; excludes wall clock for reproducibility."""
    names = report.domain.names
    best = None
    if report.best is not None:
        best = _sample_dict(report.best, names)
        if report.best.scenario is not None:
            scenario_names = get_plant(report.plant_id).scenario.names
            best["scenario"] = {
                n: float(v) for n, v in zip(scenario_names, report.best.scenario)
            }
    return {
        "plant": report.plant_id,
        "optimizer": report.optimizer,
        "mode": report.mode,
        "seed": report.seed,
        "spec": report.spec_text,
        "upper_budget": report.upper_budget,
        "lower_budget": report.lower_budget,
        "distance_order": report.distance_order,
        "domain": {
            "names": list(names),
            "lower": report.domain.lower.tolist(),
            "upper": report.domain.upper.tolist(),
            "nominal": report.domain.nominal.tolist(),
        },
        "total_samples": report.total_samples,
        "violations": report.violations,
        "blowup_samples": report.blowup_indices,
        "best": best,
        "samples": [_sample_dict(s, names) for s in report.samples],
    }


def write_report_json(report: FalsificationReport, path: Path | str) -> None:
    path = Path(path)
    path.write_text(json.dumps(report_to_dict(report), indent=2) + "\n")


def write_log_csv(report: FalsificationReport, path: Path | str) -> None:
    """Sample log: index, one column per deviation dimension, then scores."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("index",) + report.domain.names + LOG_FIXED_COLUMNS)
        for s in report.samples:
            writer.writerow(
                [s.index]
                + [repr(float(v)) for v in s.deviation]
                + [
                    repr(float(s.gamma)),
                    repr(float(s.objective)),
                    repr(float(s.distance)),
                    int(s.is_violation),
                    s.lower_evals,
                ]
            )
