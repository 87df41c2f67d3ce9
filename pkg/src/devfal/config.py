"""Campaign configuration: one JSON file per study.

Every command reads the same document shape; each consumes the keys it
needs.  Validation failures raise ConfigError with the offending field path
so a typo is reported as `seeds[2]: expected an integer`, and the CLI maps
them to exit code 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .falsifier import MODES
from .gridscan import DEFAULT_RESOLUTION
from .optimizers import OPTIMIZER_KINDS
from .stl import Formula, FormulaSyntaxError, IntervalError, parse
from .systems import (
    DeviationDimension,
    DeviationDomain,
    DomainError,
    Plant,
    UnknownPlantError,
    get_plant,
)

__all__ = [
    "ConfigError",
    "FalsifyConfig",
    "GridScanConfig",
    "EvalConfig",
    "load_falsify_config",
    "load_gridscan_config",
    "load_eval_config",
]


class ConfigError(ValueError):
    """Malformed campaign configuration; message carries the field path."""


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _require_mapping(doc, path: str) -> dict:
    if not isinstance(doc, dict):
        _fail(path, f"expected an object, got {type(doc).__name__}")
    return doc


def _get_int(doc: dict, key: str, default: int, minimum: int = 1) -> int:
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(key, f"expected an integer, got {value!r}")
    if value < minimum:
        _fail(key, f"must be at least {minimum}, got {value}")
    return value


def _get_number(doc: dict, key: str, default: float) -> float:
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(key, f"expected a number, got {value!r}")
    return float(value)


def _load_json(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return _require_mapping(doc, str(path))


def _check_keys(doc: dict, allowed: set[str]) -> None:
    unknown = set(doc) - allowed
    if unknown:
        _fail(sorted(unknown)[0], f"unknown key (allowed: {', '.join(sorted(allowed))})")


def _plant(doc: dict) -> Plant:
    plant_id = doc.get("plant")
    if not isinstance(plant_id, str):
        _fail("plant", f"expected a plant id string, got {plant_id!r}")
    try:
        return get_plant(plant_id)
    except UnknownPlantError as exc:
        _fail("plant", str(exc.args[0]))


def _spec(doc: dict, plant: Plant) -> tuple[str, Formula]:
    text = doc.get("spec", plant.default_spec)
    if not isinstance(text, str):
        _fail("spec", f"expected a formula string, got {text!r}")
    try:
        return text, parse(text)
    except (FormulaSyntaxError, IntervalError) as exc:
        _fail("spec", str(exc))


def _formula_channels_known(formula: Formula, plant: Plant) -> None:
    from .stl import channels

    missing = channels(formula) - set(plant.observables)
    if missing:
        _fail(
            "spec",
            f"channels {sorted(missing)} not among plant observables "
            f"{list(plant.observables)}",
        )


def _domain(doc: dict, plant: Plant) -> DeviationDomain:
    raw = doc.get("deviation_domain")
    if raw is None:
        return plant.deviations
    if not isinstance(raw, list) or not raw:
        _fail("deviation_domain", "expected a non-empty list of dimension objects")
    declared = set(plant.deviations.names)
    dims = []
    for i, entry in enumerate(raw):
        where = f"deviation_domain[{i}]"
        entry = _require_mapping(entry, where)
        for key in ("name", "lower", "upper", "nominal"):
            if key not in entry:
                _fail(where, f"missing key {key!r}")
        name = entry["name"]
        if name not in declared:
            _fail(
                f"{where}.name",
                f"{name!r} is not a deviation of plant {plant.plant_id!r} "
                f"(declared: {', '.join(plant.deviations.names)})",
            )
        try:
            dims.append(
                DeviationDimension(
                    name=name,
                    lower=float(entry["lower"]),
                    upper=float(entry["upper"]),
                    nominal=float(entry["nominal"]),
                )
            )
        except (TypeError, ValueError, DomainError) as exc:
            _fail(where, str(exc))
    try:
        return DeviationDomain(tuple(dims))
    except DomainError as exc:
        raise ConfigError(f"deviation_domain: {exc}") from None


def _overrides(doc: dict, plant: Plant) -> dict[str, float] | None:
    raw = doc.get("plant_overrides")
    if raw is None:
        return None
    raw = _require_mapping(raw, "plant_overrides")
    out = {}
    for key, value in raw.items():
        if key not in plant.constants:
            _fail(
                f"plant_overrides.{key}",
                f"unknown constant for plant {plant.plant_id!r} "
                f"(known: {', '.join(sorted(plant.constants))})",
            )
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail(f"plant_overrides.{key}", f"expected a number, got {value!r}")
        out[key] = float(value)
    return out


def _seeds(doc: dict) -> tuple[int, ...]:
    raw = doc.get("seeds", [0])
    if not isinstance(raw, list) or not raw:
        _fail("seeds", f"expected a non-empty list of integers, got {raw!r}")
    seeds = []
    for i, value in enumerate(raw):
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            _fail(f"seeds[{i}]", f"expected a non-negative integer, got {value!r}")
        seeds.append(value)
    if len(set(seeds)) != len(seeds):
        _fail("seeds", f"seeds must be distinct, got {seeds}")
    if "repetitions" in doc and doc["repetitions"] != len(seeds):
        _fail(
            "repetitions",
            f"{doc['repetitions']} does not match the {len(seeds)} seeds listed",
        )
    return tuple(seeds)


def _optimizers(doc: dict) -> tuple[str, ...]:
    raw = doc.get("optimizers", ["cma-es"])
    if not isinstance(raw, list) or not raw:
        _fail("optimizers", f"expected a non-empty list, got {raw!r}")
    for i, kind in enumerate(raw):
        if kind not in OPTIMIZER_KINDS:
            _fail(
                f"optimizers[{i}]",
                f"unknown optimizer {kind!r} (choose from {', '.join(OPTIMIZER_KINDS)})",
            )
    if len(set(raw)) != len(raw):
        _fail("optimizers", f"optimizers must be distinct, got {raw}")
    return tuple(raw)


def _mode(doc: dict) -> str:
    mode = doc.get("mode", "min-violation")
    if mode not in MODES:
        _fail("mode", f"unknown mode {mode!r} (choose from {', '.join(MODES)})")
    return mode


def _point(doc: dict, key: str, names: tuple[str, ...]) -> np.ndarray:
    raw = doc.get(key)
    if raw is None:
        _fail(key, "required for this command")
    if isinstance(raw, list):
        if len(raw) != len(names):
            _fail(key, f"expected {len(names)} values for {list(names)}, got {len(raw)}")
        values = raw
    elif isinstance(raw, dict):
        missing = set(names) - set(raw)
        extra = set(raw) - set(names)
        if missing:
            _fail(key, f"missing entries for {sorted(missing)}")
        if extra:
            _fail(key, f"unknown entries {sorted(extra)} (expected {list(names)})")
        values = [raw[n] for n in names]
    else:
        _fail(key, f"expected a list or an object, got {type(raw).__name__}")
    for name, value in zip(names, values):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail(f"{key}.{name}", f"expected a number, got {value!r}")
    return np.array([float(v) for v in values])


_COMMON_KEYS = {"plant", "spec", "output_dir", "plant_overrides"}


@dataclass(frozen=True, eq=False)
class FalsifyConfig:
    plant: Plant
    spec_text: str
    formula: Formula
    domain: DeviationDomain
    mode: str
    optimizers: tuple[str, ...]
    upper_budget: int
    lower_budget: int
    seeds: tuple[int, ...]
    distance_order: float
    output_dir: Path
    overrides: dict[str, float] | None


def load_falsify_config(path: Path | str) -> FalsifyConfig:
    doc = _load_json(Path(path))
    _check_keys(
        doc,
        _COMMON_KEYS
        | {
            "mode",
            "optimizers",
            "upper_budget",
            "lower_budget",
            "seeds",
            "repetitions",
            "distance_order",
            "deviation_domain",
        },
    )
    plant = _plant(doc)
    spec_text, formula = _spec(doc, plant)
    _formula_channels_known(formula, plant)
    order = _get_number(doc, "distance_order", 2.0)
    if order < 1:
        _fail("distance_order", f"norm order must be >= 1, got {order}")
    return FalsifyConfig(
        plant=plant,
        spec_text=spec_text,
        formula=formula,
        domain=_domain(doc, plant),
        mode=_mode(doc),
        optimizers=_optimizers(doc),
        upper_budget=_get_int(doc, "upper_budget", 100),
        lower_budget=_get_int(doc, "lower_budget", 50),
        seeds=_seeds(doc),
        distance_order=order,
        output_dir=Path(doc.get("output_dir", "results")),
        overrides=_overrides(doc, plant),
    )


@dataclass(frozen=True, eq=False)
class GridScanConfig:
    plant: Plant
    spec_text: str
    domain: DeviationDomain
    resolution: int
    lower_budget: int
    seed: int
    output_dir: Path
    overrides: dict[str, float] | None


def load_gridscan_config(path: Path | str) -> GridScanConfig:
    doc = _load_json(Path(path))
    _check_keys(
        doc,
        _COMMON_KEYS | {"resolution", "lower_budget", "seed", "deviation_domain"},
    )
    plant = _plant(doc)
    spec_text, formula = _spec(doc, plant)
    _formula_channels_known(formula, plant)
    domain = _domain(doc, plant)
    if domain.dimension != 2:
        _fail(
            "deviation_domain" if "deviation_domain" in doc else "plant",
            f"grid scan needs a 2-dim deviation domain, got {domain.dimension} "
            f"({', '.join(domain.names)})",
        )
    return GridScanConfig(
        plant=plant,
        spec_text=spec_text,
        domain=domain,
        resolution=_get_int(doc, "resolution", DEFAULT_RESOLUTION),
        lower_budget=_get_int(doc, "lower_budget", 50),
        seed=_get_int(doc, "seed", 0, minimum=0),
        output_dir=Path(doc.get("output_dir", "results")),
        overrides=_overrides(doc, plant),
    )


@dataclass(frozen=True, eq=False)
class EvalConfig:
    plant: Plant
    spec_text: str
    formula: Formula
    delta: np.ndarray
    scenario: np.ndarray
    output_dir: Path | None
    overrides: dict[str, float] | None


def load_eval_config(path: Path | str) -> EvalConfig:
    doc = _load_json(Path(path))
    _check_keys(doc, _COMMON_KEYS | {"delta", "scenario"})
    plant = _plant(doc)
    spec_text, formula = _spec(doc, plant)
    _formula_channels_known(formula, plant)
    delta = _point(doc, "delta", plant.deviations.names)
    scenario = _point(doc, "scenario", plant.scenario.names)
    try:
        plant.deviations.require(delta)
        plant.scenario.require(scenario)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    out = doc.get("output_dir")
    return EvalConfig(
        plant=plant,
        spec_text=spec_text,
        formula=formula,
        delta=delta,
        scenario=scenario,
        output_dir=Path(out) if out is not None else None,
        overrides=_overrides(doc, plant),
    )
