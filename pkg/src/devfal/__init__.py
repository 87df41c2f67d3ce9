"""devfal: how much plant deviation does a control specification survive?

The library searches a box of plant-parameter deviations for points whose
worst-case signal temporal logic robustness goes negative, using a two-layer
scheme: an upper-layer optimizer proposes deviations, and for each one a
lower-layer CMA-ES hunts the scenario space for the trajectory that hurts
most.  Besides yes/no falsification it estimates the *nearest* violating
deviation, a direct measure of the margin the controller actually has.

Typical use:

    from devfal import falsify, make_problem
    report = falsify(make_problem("cartpole"), "cma-es")
    print(report.violations, report.best)
"""

from .falsifier import (
    BLOWUP_GAMMA,
    MODES,
    FalsificationProblem,
    FalsificationReport,
    LowerResult,
    SampleRecord,
    derive_seed,
    distance,
    falsify,
    lower_falsify,
    make_problem,
    normalize,
    objective,
    report_to_dict,
    write_log_csv,
    write_report_json,
)
from .gridscan import GridCell, GridScan, scan, write_grid_csv, write_grid_json
from .optimizers import (
    BudgetExhaustedError,
    CmaEs,
    OPTIMIZER_KINDS,
    RandomSearch,
    SearchBox,
    make_optimizer,
    population_size,
)
from .stl import (
    Formula,
    FormulaSyntaxError,
    HorizonError,
    Interval,
    IntervalError,
    Signal,
    UnknownChannelError,
    evaluate,
    evaluate_reference,
    parse,
    to_text,
)
from .systems import (
    PLANT_IDS,
    DeviationDimension,
    DeviationDomain,
    DomainError,
    Plant,
    ScenarioDimension,
    ScenarioSpace,
    SimulationBlowupError,
    SystemInstance,
    Trajectory,
    UnknownPlantError,
    get_plant,
    instantiate,
    list_plants,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "BLOWUP_GAMMA",
    "BudgetExhaustedError",
    "CmaEs",
    "DeviationDimension",
    "DeviationDomain",
    "DomainError",
    "FalsificationProblem",
    "FalsificationReport",
    "Formula",
    "FormulaSyntaxError",
    "GridCell",
    "GridScan",
    "HorizonError",
    "Interval",
    "IntervalError",
    "LowerResult",
    "MODES",
    "OPTIMIZER_KINDS",
    "PLANT_IDS",
    "Plant",
    "RandomSearch",
    "SampleRecord",
    "ScenarioDimension",
    "ScenarioSpace",
    "SearchBox",
    "Signal",
    "SimulationBlowupError",
    "SystemInstance",
    "Trajectory",
    "UnknownChannelError",
    "UnknownPlantError",
    "derive_seed",
    "distance",
    "evaluate",
    "evaluate_reference",
    "falsify",
    "get_plant",
    "instantiate",
    "list_plants",
    "lower_falsify",
    "make_problem",
    "normalize",
    "objective",
    "parse",
    "population_size",
    "report_to_dict",
    "scan",
    "simulate",
    "to_text",
    "write_grid_csv",
    "write_grid_json",
    "write_log_csv",
    "write_report_json",
]
