"""Benchmark plants: closed-loop systems with deviation and scenario spaces.

A plant bundles a deterministic simulator, the physical constants it reads,
the box of parameter deviations under study (with the nominal point), the box
of test scenarios (initial conditions and exogenous inputs), and a default
requirement in concrete formula syntax.

Deviations are named after the constant they replace, so instantiating a
plant at a deviation is a dictionary merge.  Every constant, including
controller gains, step size, and step count, can be overridden per run.

Simulators are plain float loops: they are called tens of thousands of times
per search, and scalar Python beats numpy at this trajectory length.  Each
returns an (n_steps + 1, n_observables) array sampled BEFORE each step, so
row i is the state at time i * dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .stl.semantics import Signal

__all__ = [
    "DeviationDimension",
    "DeviationDomain",
    "ScenarioDimension",
    "ScenarioSpace",
    "Plant",
    "SystemInstance",
    "Trajectory",
    "DomainError",
    "UnknownPlantError",
    "SimulationBlowupError",
    "get_plant",
    "instantiate",
    "simulate",
    "observables",
    "list_plants",
    "PLANT_IDS",
]


class DomainError(ValueError):
    """A point lies outside its declared box, or a box is malformed."""


class UnknownPlantError(KeyError):
    """No plant registered under the requested id."""


class SimulationBlowupError(RuntimeError):
    """A state coordinate became non-finite during integration.

    step is the first bad sample index, or -1 when the integrator itself
    overflowed before producing a trajectory.
    """

    def __init__(self, plant_id: str, step: int):
        self.plant_id = plant_id
        self.step = step
        where = f"at step {step}" if step >= 0 else "during integration"
        super().__init__(f"{plant_id} state became non-finite {where}")


# ---------------------------------------------------------------------------
# boxes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeviationDimension:
    """One deviated parameter: bounds and its nominal (as-designed) value."""

    name: str
    lower: float
    upper: float
    nominal: float

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise DomainError(
                f"deviation {self.name!r}: bounds [{self.lower}, {self.upper}] "
                "must have positive width"
            )
        if not self.lower <= self.nominal <= self.upper:
            raise DomainError(
                f"deviation {self.name!r}: nominal {self.nominal} outside "
                f"[{self.lower}, {self.upper}]"
            )


@dataclass(frozen=True, eq=False)
class DeviationDomain:
    """Axis-aligned deviation box with the nominal point inside."""

    dimensions: tuple[DeviationDimension, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        if not self.dimensions:
            raise DomainError("deviation domain needs at least one dimension")
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate deviation names: {names}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    @property
    def dimension(self) -> int:
        return len(self.dimensions)

    @property
    def lower(self) -> np.ndarray:
        return np.array([d.lower for d in self.dimensions])

    @property
    def upper(self) -> np.ndarray:
        return np.array([d.upper for d in self.dimensions])

    @property
    def nominal(self) -> np.ndarray:
        return np.array([d.nominal for d in self.dimensions])

    def contains(self, delta) -> bool:
        delta = np.asarray(delta, dtype=float)
        return (
            delta.shape == (self.dimension,)
            and bool(np.all(delta >= self.lower))
            and bool(np.all(delta <= self.upper))
        )

    def require(self, delta) -> np.ndarray:
        delta = np.asarray(delta, dtype=float)
        if delta.shape != (self.dimension,):
            raise DomainError(
                f"deviation has shape {delta.shape}, expected ({self.dimension},)"
            )
        for dim, value in zip(self.dimensions, delta):
            if not dim.lower <= value <= dim.upper:
                raise DomainError(
                    f"deviation {dim.name!r} = {value} outside "
                    f"[{dim.lower}, {dim.upper}]"
                )
        return delta


@dataclass(frozen=True)
class ScenarioDimension:
    name: str
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.lower <= self.upper:
            raise DomainError(
                f"scenario {self.name!r}: lower {self.lower} exceeds upper {self.upper}"
            )


@dataclass(frozen=True, eq=False)
class ScenarioSpace:
    """Box of initial conditions and exogenous input parameters."""

    dimensions: tuple[ScenarioDimension, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        if not self.dimensions:
            raise DomainError("scenario space needs at least one dimension")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    @property
    def dimension(self) -> int:
        return len(self.dimensions)

    @property
    def lower(self) -> np.ndarray:
        return np.array([d.lower for d in self.dimensions])

    @property
    def upper(self) -> np.ndarray:
        return np.array([d.upper for d in self.dimensions])

    def require(self, scenario) -> np.ndarray:
        scenario = np.asarray(scenario, dtype=float)
        if scenario.shape != (self.dimension,):
            raise DomainError(
                f"scenario has shape {scenario.shape}, expected ({self.dimension},)"
            )
        for dim, value in zip(self.dimensions, scenario):
            if not dim.lower <= value <= dim.upper:
                raise DomainError(
                    f"scenario {dim.name!r} = {value} outside "
                    f"[{dim.lower}, {dim.upper}]"
                )
        return scenario


# ---------------------------------------------------------------------------
# plants and instances
# ---------------------------------------------------------------------------


Simulator = Callable[[Mapping[str, float], np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Plant:
    """A closed-loop benchmark system with its study spaces and defaults."""

    plant_id: str
    description: str
    observables: tuple[str, ...]
    deviations: DeviationDomain
    scenario: ScenarioSpace
    constants: Mapping[str, float]
    default_spec: str
    simulator: Simulator = field(repr=False)

    @property
    def dt(self) -> float:
        return float(self.constants["dt"])

    @property
    def n_steps(self) -> int:
        return int(self.constants["n_steps"])


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One simulated run: the observable signal plus the scenario behind it."""

    signal: Signal
    scenario: np.ndarray


@dataclass(frozen=True, eq=False)
class SystemInstance:
    """A plant frozen at one deviation, with every constant resolved.

    Controllers live inside the simulator and are rebuilt per rollout, so an
    instance can be simulated from many threads at once.  The controller
    interface is one state observation in, one actuation out, with whatever
    internal memory the controller keeps (the shipped ones keep at most an
    error integrator); nothing restricts a controller to the current state.
    """

    plant: Plant
    deviation: np.ndarray
    constants: Mapping[str, float]

    @property
    def dt(self) -> float:
        return float(self.constants["dt"])

    @property
    def n_steps(self) -> int:
        return int(self.constants["n_steps"])

    def simulate(self, scenario) -> Trajectory:
        return simulate(self, scenario)


def instantiate(
    plant: Plant | str,
    delta,
    domain: DeviationDomain | None = None,
    overrides: Mapping[str, float] | None = None,
) -> SystemInstance:
    """Apply a deviation (and optional constant overrides) to a plant.

    The deviation is validated against `domain` when given, else against the
    plant's declared deviation box.  Unknown override keys are rejected so a
    typo cannot silently leave a constant at its default.
    """
    if isinstance(plant, str):
        plant = get_plant(plant)
    domain = domain or plant.deviations
    if domain.names != plant.deviations.names:
        unknown = set(domain.names) - set(plant.deviations.names)
        if unknown:
            raise DomainError(
                f"deviation names {sorted(unknown)} not declared by plant "
                f"{plant.plant_id!r} (has {list(plant.deviations.names)})"
            )
    delta = domain.require(delta)
    constants = dict(plant.constants)
    if overrides:
        unknown = set(overrides) - set(constants)
        if unknown:
            raise DomainError(
                f"unknown constants {sorted(unknown)} for plant {plant.plant_id!r}"
            )
        constants.update({k: float(v) for k, v in overrides.items()})
    constants.update(zip(domain.names, delta.tolist()))
    return SystemInstance(plant=plant, deviation=delta, constants=constants)


def simulate(instance: SystemInstance, scenario) -> Trajectory:
    """Roll out the closed loop from one scenario.

    Pure function of (instance, scenario): repeated calls return identical
    trajectories.  Raises SimulationBlowupError when integration produces a
    non-finite state.
    """
    scenario = instance.plant.scenario.require(scenario)
    try:
        samples = instance.plant.simulator(instance.constants, scenario)
    except (OverflowError, ValueError) as exc:
        raise SimulationBlowupError(instance.plant.plant_id, -1) from exc
    if not np.all(np.isfinite(samples)):
        bad = int(np.argwhere(~np.isfinite(samples).all(axis=1))[0][0])
        raise SimulationBlowupError(instance.plant.plant_id, bad)
    signal = Signal(
        dt=instance.dt, channels=instance.plant.observables, samples=samples
    )
    return Trajectory(signal=signal, scenario=scenario)


def observables(plant: Plant | str) -> tuple[str, ...]:
    """Channel names produced by the plant's simulator, in column order."""
    if isinstance(plant, str):
        plant = get_plant(plant)
    return plant.observables


# ---------------------------------------------------------------------------
# cart-pole: bang-bang balance of an inverted pendulum on a cart
# ---------------------------------------------------------------------------


def _simulate_cartpole(c: Mapping[str, float], scenario: np.ndarray) -> np.ndarray:
    mc = c["cart_mass"]
    mp = c["pole_mass"]
    half = c["pole_length"]
    force = c["force"]
    g = c["gravity"]
    k_th, k_thd = c["gain_theta"], c["gain_theta_dot"]
    k_x, k_xd = c["gain_x"], c["gain_x_dot"]
    delay = int(c["actuation_delay"])
    dt = c["dt"]
    n = int(c["n_steps"])

    x, xd, th, thd = scenario.tolist()
    total = mc + mp
    pending = [0.0] * delay  # commands issued but not yet at the actuator
    out = np.empty((n + 1, 4))
    for i in range(n):
        out[i, 0] = x
        out[i, 1] = xd
        out[i, 2] = th
        out[i, 3] = thd
        u = k_th * th + k_thd * thd + k_x * x + k_xd * xd
        cmd = force if u >= 0 else -force
        if delay:
            pending.append(cmd)
            fa = pending.pop(0)
        else:
            fa = cmd
        sin_th = math.sin(th)
        cos_th = math.cos(th)
        temp = (fa + mp * half * thd * thd * sin_th) / total
        th_acc = (g * sin_th - cos_th * temp) / (
            half * (4.0 / 3.0 - mp * cos_th * cos_th / total)
        )
        x_acc = temp - mp * half * th_acc * cos_th / total
        x += dt * xd
        xd += dt * x_acc
        th += dt * thd
        thd += dt * th_acc
    out[n] = (x, xd, th, thd)
    return out


_CARTPOLE_CONSTANTS = {
    "cart_mass": 1.0,
    "pole_mass": 0.1,
    "pole_length": 0.5,  # half-length of the pole, m
    "force": 10.0,  # actuator magnitude, N (bang-bang)
    "gravity": 9.8,
    "gain_theta": 10.0,
    "gain_theta_dot": 2.0,
    "gain_x": 0.5,
    "gain_x_dot": 1.0,
    # sensing-to-actuation latency in steps; the relay limit cycle grows with
    # force * delay, which is what makes an over-strong actuator unsafe
    "actuation_delay": 3,
    "dt": 0.02,
    "n_steps": 400,
}

_CARTPOLE_SPEC = "G[0,8] (abs(theta) < 0.2095 and abs(x) < 2.4)"

_CARTPOLE_SCENARIO = ScenarioSpace(
    tuple(
        ScenarioDimension(name, -0.05, 0.05)
        for name in ("x0", "x_dot0", "theta0", "theta_dot0")
    )
)

_CARTPOLE_DIMS = {
    "cart_mass": DeviationDimension("cart_mass", 0.5, 2.0, 1.0),
    "pole_mass": DeviationDimension("pole_mass", 0.05, 0.5, 0.1),
    "pole_length": DeviationDimension("pole_length", 0.25, 1.0, 0.5),
    "force": DeviationDimension("force", 5.0, 20.0, 10.0),
}


# ---------------------------------------------------------------------------
# water tank: PI level control through a saturating valve
# ---------------------------------------------------------------------------


def _simulate_watertank(c: Mapping[str, float], scenario: np.ndarray) -> np.ndarray:
    inflow = c["base_inflow"] * c["inflow_mult"]
    outflow = c["base_outflow"] * c["outflow_mult"]
    area = c["area"]
    href = c["level_ref"]
    kp, ki = c["gain_p"], c["gain_i"]
    dt = c["dt"]
    n = int(c["n_steps"])

    h = scenario[0]
    integral = 0.0
    out = np.empty((n + 1, 2))
    for i in range(n):
        out[i, 0] = h
        out[i, 1] = h - href
        err = href - h
        u = kp * err + ki * integral
        # conditional anti-windup: freeze the integrator while the valve is
        # saturated in the direction the error keeps pushing
        if not ((u > 1.0 and err > 0.0) or (u < 0.0 and err < 0.0)):
            integral += err * dt
            u = kp * err + ki * integral
        u = min(1.0, max(0.0, u))
        dh = (inflow * u - outflow * math.sqrt(max(h, 0.0))) / area
        h = max(h + dt * dh, 0.0)  # the tank cannot hold a negative volume
    out[n] = (h, h - href)
    return out


_WATERTANK_CONSTANTS = {
    "base_inflow": 0.25,  # valve fully open: inflow per unit area, m/s
    "base_outflow": 0.2,  # outflow coefficient, m^0.5/s
    "area": 1.0,
    "level_ref": 1.0,
    "inflow_mult": 1.0,
    "outflow_mult": 1.0,
    "gain_p": 3.0,
    "gain_i": 1.0,
    "gain_d": 0.0,
    "dt": 0.1,
    "n_steps": 300,
}

_WATERTANK_SPEC = "G[10,30] abs(level - 1.0) < 0.15"

_WATERTANK_SCENARIO = ScenarioSpace((ScenarioDimension("level0", 0.2, 1.8),))

_WATERTANK_DIMS = {
    "inflow_mult": DeviationDimension("inflow_mult", 0.5, 1.5, 1.0),
    "outflow_mult": DeviationDimension("outflow_mult", 0.5, 1.5, 1.0),
}


# ---------------------------------------------------------------------------
# adaptive cruise control: gap tracking behind a braking lead vehicle
# ---------------------------------------------------------------------------

_ACC_SEGMENTS = 5


def _simulate_acc(c: Mapping[str, float], scenario: np.ndarray) -> np.ndarray:
    mass_mult = c["mass_mult"]
    a_lo, a_hi = c["lead_a_min"], c["lead_a_max"]
    ego_min, ego_max = c["ego_a_min"], c["ego_a_max"]
    d0, headway = c["d_default"], c["time_gap"]
    k_gap, k_speed, k_cruise = c["gain_gap"], c["gain_speed"], c["gain_cruise"]
    dt = c["dt"]
    n = int(c["n_steps"])

    gap, v_ego, v_lead = scenario[0], scenario[1], scenario[2]
    v_set = v_ego  # cruise set point: the speed the ACC was engaged at
    profile = [a_lo + s * (a_hi - a_lo) for s in scenario[3:]]
    seg_len = n / len(profile)

    x_ego, x_lead = 0.0, gap
    out = np.empty((n + 1, 4))
    for i in range(n):
        d_rel = x_lead - x_ego
        d_safe = d0 + headway * v_ego
        out[i] = (d_rel, v_ego, v_lead, d_safe)
        follow = k_gap * (d_rel - d_safe) + k_speed * (v_lead - v_ego)
        u = min(follow, k_cruise * (v_set - v_ego))
        a_ego = min(ego_max, max(ego_min, u)) / mass_mult
        a_lead = profile[min(int(i / seg_len), len(profile) - 1)]
        x_ego += dt * v_ego
        v_ego = max(v_ego + dt * a_ego, 0.0)  # no reversing
        x_lead += dt * v_lead
        v_lead = max(v_lead + dt * a_lead, 0.0)
    out[n] = (x_lead - x_ego, v_ego, v_lead, c["d_default"] + headway * v_ego)
    return out


_ACC_CONSTANTS = {
    "mass_mult": 1.0,
    "lead_a_min": -1.0,  # lead vehicle acceleration range, m/s^2
    "lead_a_max": 1.0,
    "ego_a_min": -3.0,  # ego actuation limits before the mass multiplier
    "ego_a_max": 2.0,
    "d_default": 10.0,  # standstill distance, m
    "time_gap": 1.4,  # headway, s
    "gain_gap": 0.1,
    # 1/time_gap cancels the headway growth while tracking an accelerating or
    # braking lead; any other value leaves a steady-state margin offset
    "gain_speed": 1.0 / 1.4,
    "gain_cruise": 1.0,
    "dt": 0.1,
    "n_steps": 300,
}

_ACC_SPEC = "G[0,30] d_rel - d_safe > 0"

_ACC_SCENARIO = ScenarioSpace(
    (
        ScenarioDimension("gap0", 60.0, 100.0),
        ScenarioDimension("v_ego0", 15.0, 25.0),
        ScenarioDimension("v_lead0", 15.0, 25.0),
    )
    + tuple(ScenarioDimension(f"lead_c{i + 1}", 0.0, 1.0) for i in range(_ACC_SEGMENTS))
)

_ACC_DIMS = {
    "mass_mult": DeviationDimension("mass_mult", 0.8, 1.5, 1.0),
    "lead_a_min": DeviationDimension("lead_a_min", -3.0, -0.5, -1.0),
    "lead_a_max": DeviationDimension("lead_a_max", 0.5, 3.0, 1.0),
}


# ---------------------------------------------------------------------------
# linear-safe: analytic sanity plant, robustness = 1 - d1 - d2
# ---------------------------------------------------------------------------


def _simulate_linear_safe(c: Mapping[str, float], scenario: np.ndarray) -> np.ndarray:
    value = 1.0 - c["d1"] - c["d2"]
    return np.array([[value], [value]])


_LINEAR_SAFE_CONSTANTS = {"d1": 0.0, "d2": 0.0, "dt": 1.0, "n_steps": 1}


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


def _plant_cartpole(preset: tuple[str, ...], plant_id: str) -> Plant:
    return Plant(
        plant_id=plant_id,
        description="inverted pendulum on a cart, bang-bang balance controller",
        observables=("x", "x_dot", "theta", "theta_dot"),
        deviations=DeviationDomain(tuple(_CARTPOLE_DIMS[k] for k in preset)),
        scenario=_CARTPOLE_SCENARIO,
        constants=dict(_CARTPOLE_CONSTANTS),
        default_spec=_CARTPOLE_SPEC,
        simulator=_simulate_cartpole,
    )


def _build_registry() -> dict[str, Plant]:
    plants = [
        _plant_cartpole(("cart_mass", "force"), "cartpole"),
        _plant_cartpole(
            ("cart_mass", "pole_mass", "pole_length", "force"), "cartpole4"
        ),
        Plant(
            plant_id="watertank",
            description="water tank level held by a PI-controlled valve",
            observables=("level", "error"),
            deviations=DeviationDomain(
                (_WATERTANK_DIMS["inflow_mult"], _WATERTANK_DIMS["outflow_mult"])
            ),
            scenario=_WATERTANK_SCENARIO,
            constants=dict(_WATERTANK_CONSTANTS),
            default_spec=_WATERTANK_SPEC,
            simulator=_simulate_watertank,
        ),
        Plant(
            plant_id="acc",
            description="adaptive cruise control behind a lead car, gap safety",
            observables=("d_rel", "v_ego", "v_lead", "d_safe"),
            deviations=DeviationDomain(
                (_ACC_DIMS["lead_a_min"], _ACC_DIMS["lead_a_max"])
            ),
            scenario=_ACC_SCENARIO,
            constants=dict(_ACC_CONSTANTS),
            default_spec=_ACC_SPEC,
            simulator=_simulate_acc,
        ),
        Plant(
            plant_id="acc3",
            description="adaptive cruise control, mass and lead-range deviations",
            observables=("d_rel", "v_ego", "v_lead", "d_safe"),
            deviations=DeviationDomain(
                (
                    _ACC_DIMS["mass_mult"],
                    _ACC_DIMS["lead_a_min"],
                    _ACC_DIMS["lead_a_max"],
                )
            ),
            scenario=_ACC_SCENARIO,
            constants=dict(_ACC_CONSTANTS),
            default_spec=_ACC_SPEC,
            simulator=_simulate_acc,
        ),
        Plant(
            plant_id="linear-safe",
            description="analytic plant with robustness 1 - d1 - d2",
            observables=("c",),
            deviations=DeviationDomain(
                (
                    DeviationDimension("d1", 0.0, 1.0, 0.0),
                    DeviationDimension("d2", 0.0, 1.0, 0.0),
                )
            ),
            scenario=ScenarioSpace((ScenarioDimension("phase", 0.0, 1.0),)),
            constants=dict(_LINEAR_SAFE_CONSTANTS),
            default_spec="G[0,0] c > 0",
            simulator=_simulate_linear_safe,
        ),
    ]
    return {p.plant_id: p for p in plants}


_REGISTRY = _build_registry()

PLANT_IDS = tuple(sorted(_REGISTRY))


def get_plant(plant_id: str) -> Plant:
    try:
        return _REGISTRY[plant_id]
    except KeyError:
        raise UnknownPlantError(
            f"unknown plant {plant_id!r}; available: {', '.join(PLANT_IDS)}"
        ) from None


def list_plants() -> tuple[Plant, ...]:
    return tuple(_REGISTRY[k] for k in PLANT_IDS)
