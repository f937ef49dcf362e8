"""Hybrid time integration of the transmission system.

Two modes integrate the same dynamics:

* ``exact-jump`` (default): the smooth linear system is integrated on
  each interval between discrete events with an adaptive,
  stiffness-aware method; at event times, presence flips select a new
  constant operator and disinfection applies its ``10**(-lrv)`` survival
  factor as an exact multiplicative jump.
* ``smoothed``: one continuous integration in which presence indicators
  become trapezoids and disinfection becomes triangular removal pulses;
  the maximum step is capped well below the ramp width so the solver
  cannot step over a pulse.

Simultaneous events apply in a fixed order (exits, hand washes, surface
cleanings, entries; ties within a kind by target id) so runs are
deterministic.  A cleaning that coincides with a departure therefore
acts on the post-departure state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from tripath.dynamics import StateLayout, TransmissionModel, IndicatorSpec, indicator, model_for
from tripath.errors import IntegrationError, ScenarioValidationError
from tripath.kernels import LN2, aerosol_emission_rate, discrete_cleaning_jump
from tripath.scenario import Scenario, scenario_digest, validate

#: Application order for simultaneous events.
KIND_ORDER = {"exit": 0, "hand_wash": 1, "surface_clean": 2, "entry": 3}


@dataclass(frozen=True)
class Event:
    """One discrete change: a presence flip or a disinfection."""

    time: float
    kind: str  #: "entry" | "exit" | "hand_wash" | "surface_clean"
    target: str  #: individual or surface id


@dataclass(frozen=True)
class EventRecord:
    """A disinfection jump as applied, with the affected load before/after."""

    time: float
    kind: str
    target: str
    load_before: float
    load_after: float


@dataclass(frozen=True, eq=False)
class BoundarySnapshot:
    """Full state immediately before and after the events at one instant."""

    time: float
    state_before: np.ndarray
    state_after: np.ndarray


@dataclass(frozen=True)
class EventTimeline:
    """All discrete events of a scenario, sorted and deterministically ordered."""

    events: tuple[Event, ...]

    @classmethod
    def from_scenario(cls, scenario: Scenario, t_end: float | None = None) -> "EventTimeline":
        horizon = scenario.setting.observation_end if t_end is None else t_end
        events = []
        for p in scenario.individuals:
            events.append(Event(p.entry_time, "entry", p.id))
            events.append(Event(p.entry_time + p.duration, "exit", p.id))
            if p.hand_wash is not None and p.hand_wash.mode == "discrete":
                events += [Event(t, "hand_wash", p.id) for t in p.hand_wash.event_times]
        for f in scenario.surfaces:
            if f.cleaning is not None and f.cleaning.mode == "discrete":
                events += [Event(t, "surface_clean", f.id) for t in f.cleaning.event_times]
        kept = [e for e in events if 0.0 <= e.time <= horizon]
        kept.sort(key=lambda e: (e.time, KIND_ORDER[e.kind], e.target))
        return cls(tuple(kept))

    def times(self) -> tuple[float, ...]:
        return tuple(sorted({e.time for e in self.events}))

    def at(self, time: float) -> tuple[Event, ...]:
        return tuple(e for e in self.events if e.time == time)


@dataclass(frozen=True)
class IntegrationConfig:
    """Solver settings; None fields fall back to the scenario's values."""

    rtol: float = 1e-8
    atol: float = 1e-4  #: viral particles
    max_step: float | None = None  #: h
    grid_step: float = 0.01  #: h, dense output spacing
    mode: str | None = None  #: "exact-jump" | "smoothed" | None (scenario default)
    epsilon: float | None = None  #: h, smoothing width override
    t_end: float | None = None  #: h, horizon override
    method: str = "LSODA"


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Dense trajectory plus event records and provenance.

    ``states`` has one row per grid time; at an event instant the row
    holds the pre-jump value, with both sides available in
    ``boundaries``.
    """

    times: np.ndarray
    states: np.ndarray  #: shape (len(times), layout.size)
    layout: StateLayout
    scenario: Scenario
    mode: str
    epsilon: float
    config: IntegrationConfig
    initial_state: np.ndarray  #: state at t = 0 before any t = 0 events
    events: tuple[EventRecord, ...]
    boundaries: tuple[BoundarySnapshot, ...]
    digest: str  #: scenario content hash

    def series(self, ref: str) -> np.ndarray:
        """Load trajectory of one compartment reference."""
        return self.states[:, self.layout.index_of(ref)]

    def dose(self, individual_id: str, pathway: str) -> np.ndarray:
        return self.states[:, self.layout.dose_index[(individual_id, pathway)]]

    def total_dose(self, individual_id: str) -> np.ndarray:
        columns = [self.layout.dose_index[(individual_id, w)] for w in ("fomite", "aerosol", "close_contact")]
        return self.states[:, columns].sum(axis=1)

    def ledger_series(self, name: str) -> np.ndarray:
        return self.states[:, self.layout.ledger_index[name]]

    def ledger_final(self, name: str) -> float:
        return float(self.states[-1, self.layout.ledger_index[name]])

    def surface_concentration(self, surface_id: str) -> np.ndarray:
        """Load per unit area (viral particles per cm^2)."""
        return self.series(surface_id) / self.scenario.surface(surface_id).area

    def value_at(self, ref: str, t: float) -> float:
        return float(np.interp(t, self.times, self.series(ref)))


def steady_state_air(scenario: Scenario) -> float:
    """Airborne load where emission balances all removal, everyone present.

    The balance ``S / lambda`` uses the total aerosol source of the
    infected individuals against ventilation, inactivation and the
    occupants' combined respiration.
    """
    v = scenario.setting.air_volume
    source = sum(aerosol_emission_rate(p) for p in scenario.infected())
    loss = (
        scenario.setting.ventilation_flow / v
        + LN2 / scenario.half_life("air")
        + sum(p.respiration_rate for p in scenario.individuals) / v
    )
    return source / loss


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def _check_config(config: IntegrationConfig) -> None:
    bad = []
    if config.rtol <= 0 or config.atol <= 0:
        bad.append("tolerances must be > 0")
    if config.grid_step <= 0:
        bad.append("grid_step must be > 0")
    if config.max_step is not None and config.max_step <= 0:
        bad.append("max_step must be > 0")
    if config.t_end is not None and config.t_end <= 0:
        bad.append("t_end must be > 0")
    if config.mode is not None and config.mode not in ("exact-jump", "smoothed"):
        bad.append(f"unknown mode {config.mode!r}")
    if config.epsilon is not None and config.epsilon <= 0:
        bad.append("epsilon must be > 0")
    if bad:
        raise IntegrationError("; ".join(bad))


def _make_grid(t_end: float, step: float) -> np.ndarray:
    n = int(round(t_end / step))
    if n >= 1 and math.isclose(n * step, t_end, rel_tol=1e-9, abs_tol=1e-12):
        return np.linspace(0.0, t_end, n + 1)
    return np.append(np.arange(0.0, t_end, step), t_end)


def _check_states(states: np.ndarray, times: np.ndarray, layout: StateLayout, atol: float) -> None:
    if not np.all(np.isfinite(states)):
        where = np.argwhere(~np.isfinite(states))[0]
        raise IntegrationError(
            f"non-finite state for {layout.state_labels()[where[1]]!r} at t = {times[where[0]]:g} h"
        )
    low = states.min()
    if low < -atol:
        where = np.unravel_index(np.argmin(states), states.shape)
        raise IntegrationError(
            f"state {layout.state_labels()[where[1]]!r} fell to {low:g} "
            f"(below -atol) at t = {times[where[0]]:g} h"
        )


def integrate(scenario: Scenario, config: IntegrationConfig | None = None) -> SimulationResult:
    """Simulate a scenario and return the dense trajectory.

    Raises:
        ScenarioValidationError: the scenario breaks a model invariant.
        IntegrationError: bad solver configuration, solver failure, or
            an untrustworthy trajectory (NaN or negative beyond atol).
    """
    config = IntegrationConfig() if config is None else config
    violations = validate(scenario)
    if violations:
        raise ScenarioValidationError(violations)
    _check_config(config)

    mode = config.mode if config.mode is not None else scenario.event_mode
    epsilon = config.epsilon if config.epsilon is not None else scenario.event_smoothing_epsilon
    t_end = config.t_end if config.t_end is not None else scenario.setting.observation_end
    model = model_for(scenario)
    grid = _make_grid(t_end, config.grid_step)
    y0 = model.initial_state()

    if mode == "smoothed":
        shortest = min(p.duration for p in scenario.individuals)
        if epsilon > shortest / 100.0:
            raise IntegrationError(
                "smoothed mode needs epsilon at least 100x smaller than the shortest presence "
                f"duration ({shortest:g} h); got {epsilon:g} h"
            )
        max_step = epsilon / 5.0
        if config.max_step is not None:
            max_step = min(max_step, config.max_step)
        sol = solve_ivp(
            lambda t, y: model.rhs_smoothed(t, y, epsilon),
            (0.0, t_end),
            y0,
            method=config.method,
            rtol=config.rtol,
            atol=config.atol,
            max_step=max_step,
            t_eval=grid,
        )
        if not sol.success:
            raise IntegrationError(f"smoothed integration failed: {sol.message}")
        states = sol.y.T.copy()
        events: tuple[EventRecord, ...] = ()
        boundaries: tuple[BoundarySnapshot, ...] = ()
    else:
        states, events, boundaries = _integrate_exact(model, y0, grid, t_end, config)

    _check_states(states, grid, model.layout, config.atol)
    return SimulationResult(
        times=grid,
        states=states,
        layout=model.layout,
        scenario=scenario,
        mode=mode,
        epsilon=epsilon,
        config=config,
        initial_state=y0,
        events=events,
        boundaries=boundaries,
        digest=scenario_digest(scenario),
    )


def _integrate_exact(
    model: TransmissionModel,
    y0: np.ndarray,
    grid: np.ndarray,
    t_end: float,
    config: IntegrationConfig,
) -> tuple[np.ndarray, tuple[EventRecord, ...], tuple[BoundarySnapshot, ...]]:
    scenario, layout = model.scenario, model.layout
    timeline = EventTimeline.from_scenario(scenario, t_end)
    cleaned_row = layout.ledger_index["cleaned"]
    y = y0.copy()
    records: list[EventRecord] = []
    boundaries: list[BoundarySnapshot] = []

    def apply_events(t: float) -> None:
        batch = timeline.at(t)
        if not batch:
            return
        before = y.copy()
        for ev in batch:
            if ev.kind == "hand_wash":
                policy = scenario.individual(ev.target).hand_wash
                row = layout.hand_index[ev.target]
            elif ev.kind == "surface_clean":
                policy = scenario.surface(ev.target).cleaning
                row = layout.surface_index[ev.target]
            else:
                continue  # presence flips carry no state change
            load = float(y[row])
            y[row] = discrete_cleaning_jump(policy, load)
            y[cleaned_row] += load - y[row]
            records.append(EventRecord(t, ev.kind, ev.target, load, float(y[row])))
        boundaries.append(BoundarySnapshot(t, before, y.copy()))

    apply_events(0.0)
    states = np.empty((len(grid), layout.size))
    states[0] = y
    filled = 1

    t_a = 0.0
    for t_b in sorted(set(timeline.times()) | {t_end}):
        if not 0.0 < t_b <= t_end:
            continue
        if t_b > t_a:
            mid = 0.5 * (t_a + t_b)
            pattern = tuple(
                int(indicator(IndicatorSpec(p.entry_time, p.duration), mid))
                for p in scenario.individuals
            )
            A, b = model.operator_for_pattern(pattern)
            sol = solve_ivp(
                lambda t, v: A @ v + b,
                (t_a, t_b),
                y,
                method=config.method,
                rtol=config.rtol,
                atol=config.atol,
                max_step=np.inf if config.max_step is None else config.max_step,
                jac=lambda t, v: A,
                dense_output=True,
            )
            if not sol.success:
                raise IntegrationError(
                    f"integration failed near t = {sol.t[-1]:g} h: {sol.message}"
                )
            hi = int(np.searchsorted(grid, t_b, side="right"))
            if hi > filled:
                states[filled:hi] = sol.sol(grid[filled:hi]).T
                filled = hi
            y = sol.y[:, -1].copy()
            t_a = t_b
        apply_events(t_b)

    if filled < len(grid):  # grid points past the last event time
        states[filled:] = y
    return states, tuple(records), tuple(boundaries)


__all__ = [
    "BoundarySnapshot",
    "Event",
    "EventRecord",
    "EventTimeline",
    "IntegrationConfig",
    "KIND_ORDER",
    "SimulationResult",
    "integrate",
    "steady_state_air",
]
