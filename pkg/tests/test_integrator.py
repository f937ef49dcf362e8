"""Integration driver against closed-form solutions and event semantics."""

import dataclasses
import math

import numpy as np
import pytest

from tripath.errors import IntegrationError, ScenarioValidationError
from tripath.fixtures import case_study_1, case_study_3
from tripath.integrator import (
    EventTimeline,
    IntegrationConfig,
    integrate,
    steady_state_air,
)
from tripath.kernels import LN2
from tripath.scenario import CleaningPolicy

from conftest import tiny_scenario

K_NONPOROUS = LN2 / 6.81


def _decay_scenario(**kwargs):
    """Loaded desk, nobody touches anything: pure first-order decay."""
    s = tiny_scenario(with_infected=False, initial_load=1.0e6, **kwargs)
    return dataclasses.replace(s, contacts=())


# -- closed-form oracles -------------------------------------------------------


def test_pure_decay_matches_exponential(quick_config):
    result = integrate(_decay_scenario(), quick_config)
    expected = 1.0e6 * np.exp(-K_NONPOROUS * result.times)
    assert np.allclose(result.series("desk"), expected, rtol=1e-6, atol=0.0)


def test_constant_source_air_matches_saturation_curve(quick_config):
    s = tiny_scenario(fraction_large_droplets=0.0, shedding_rate=1.0e6)
    result = integrate(s, quick_config)
    lam = 30.0 / 30.0 + LN2 / 1.1 + 2 * 0.39 / 30.0
    source = 1.0e6
    t = result.times
    expected_air = source / lam * (1.0 - np.exp(-lam * t))
    assert np.allclose(result.series("air"), expected_air, rtol=1e-6, atol=1e-6)

    # the aerosol dose is the double integral, also closed-form
    expected_dose = 0.39 / 30.0 * source / lam * (t - (1.0 - np.exp(-lam * t)) / lam)
    assert np.allclose(result.dose("visitor", "aerosol"), expected_dose, rtol=1e-6, atol=1e-9)
    assert np.all(result.dose("visitor", "fomite") == 0.0)


def test_steady_state_air_balance():
    expected = 5650750.0 / (40.0 / 40.0 + LN2 / 1.1 + 2 * 0.39 / 40.0)
    assert steady_state_air(case_study_1()) == pytest.approx(expected, rel=1e-12)
    assert steady_state_air(case_study_1()) == pytest.approx(3425457.2125378987, rel=1e-12)
    expected_3 = 5650750.0 / (400.0 / 400.0 + LN2 / 1.1 + 39 * 0.39 / 400.0)
    assert steady_state_air(case_study_3()) == pytest.approx(expected_3, rel=1e-12)


# -- discrete jumps --------------------------------------------------------------


def test_jump_is_exact_power_of_ten(quick_config):
    s = _decay_scenario(cleaning=CleaningPolicy(mode="discrete", lrv=2.0, event_times=(1.0,)))
    result = integrate(s, quick_config)

    snap = next(b for b in result.boundaries if b.time == 1.0)
    i = result.layout.surface_index["desk"]
    assert snap.state_after[i] == snap.state_before[i] * 10.0**-2.0  # bitwise exact

    assert len(result.events) == 1
    record = result.events[0]
    assert record.kind == "surface_clean" and record.target == "desk"
    assert record.time == 1.0
    assert record.load_after == record.load_before * 10.0**-2.0
    assert record.load_before == pytest.approx(1.0e6 * math.exp(-K_NONPOROUS), rel=1e-6)

    # removed load lands in the cleaned ledger and stays there
    assert result.ledger_final("cleaned") == pytest.approx(
        record.load_before - record.load_after, rel=1e-12
    )


def test_grid_row_at_event_instant_is_pre_jump(quick_config):
    s = _decay_scenario(cleaning=CleaningPolicy(mode="discrete", lrv=2.0, event_times=(1.0,)))
    result = integrate(s, quick_config)
    k = int(np.searchsorted(result.times, 1.0))
    assert result.times[k] == 1.0
    before = 1.0e6 * math.exp(-K_NONPOROUS)
    assert result.series("desk")[k] == pytest.approx(before, rel=1e-6)
    # the next grid row continues from the post-jump load
    assert result.series("desk")[k + 1] == pytest.approx(
        before * 1e-2 * math.exp(-K_NONPOROUS * 0.05), rel=1e-6
    )


def test_off_grid_event_still_exact(quick_config):
    s = _decay_scenario(cleaning=CleaningPolicy(mode="discrete", lrv=1.0, event_times=(0.975,)))
    result = integrate(s, quick_config)
    before = 1.0e6 * math.exp(-K_NONPOROUS * 0.975)
    assert result.value_at("desk", 1.0) == pytest.approx(
        before * 0.1 * math.exp(-K_NONPOROUS * 0.025), rel=1e-6
    )


def test_event_at_time_zero(quick_config):
    s = _decay_scenario(cleaning=CleaningPolicy(mode="discrete", lrv=2.0, event_times=(0.0,)))
    result = integrate(s, quick_config)
    i = result.layout.surface_index["desk"]
    assert result.initial_state[i] == 1.0e6  # before any event
    assert result.states[0, i] == 1.0e6 * 10.0**-2.0  # first row is post-event


def test_event_tie_break_order():
    s = tiny_scenario(
        cleaning=CleaningPolicy(mode="discrete", lrv=1.0, event_times=(1.0,)),
        hand_wash=CleaningPolicy(mode="discrete", lrv=1.0, event_times=(1.0,)),
    )
    patched = tuple(
        dataclasses.replace(p, duration=1.0) if p.id == "carrier" else p
        for p in s.individuals
    )
    s = dataclasses.replace(s, individuals=patched)

    batch = EventTimeline.from_scenario(s).at(1.0)
    assert [(e.kind, e.target) for e in batch] == [
        ("exit", "carrier"),
        ("hand_wash", "carrier"),
        ("hand_wash", "visitor"),
        ("surface_clean", "desk"),
    ]
    # applied records keep that order (presence flips carry no record)
    result = integrate(s, IntegrationConfig(grid_step=0.05))
    applied = [(r.kind, r.target) for r in result.events if r.time == 1.0]
    assert applied == [("hand_wash", "carrier"), ("hand_wash", "visitor"), ("surface_clean", "desk")]


def test_timeline_excludes_events_past_horizon():
    s = tiny_scenario(cleaning=CleaningPolicy(mode="discrete", lrv=1.0, event_times=(1.5,)))
    timeline = EventTimeline.from_scenario(s, t_end=1.0)
    assert all(e.time <= 1.0 for e in timeline.events)


# -- smoothed mode ----------------------------------------------------------------


def test_smoothed_agrees_with_exact_jump():
    s = tiny_scenario(
        cleaning=CleaningPolicy(mode="discrete", lrv=2.0, event_times=(1.0,)),
        initial_mucosa_load=1.0e6,
    )
    exact = integrate(s, IntegrationConfig(grid_step=0.05))
    smoothed = integrate(s, IntegrationConfig(grid_step=0.05, mode="smoothed", epsilon=1e-3))
    assert smoothed.mode == "smoothed" and smoothed.events == ()

    for ref in ("desk", "air", "hand:visitor"):
        a, b = exact.series(ref)[-1], smoothed.series(ref)[-1]
        assert b == pytest.approx(a, rel=1e-2, abs=1e-6)
    assert smoothed.total_dose("visitor")[-1] == pytest.approx(
        exact.total_dose("visitor")[-1], rel=1e-2
    )


def test_smoothed_rejects_wide_epsilon():
    with pytest.raises(IntegrationError, match="100x smaller"):
        integrate(tiny_scenario(), IntegrationConfig(mode="smoothed", epsilon=0.1))


# -- driver contract ----------------------------------------------------------------


def test_integrate_rejects_bad_config():
    s = tiny_scenario()
    with pytest.raises(IntegrationError, match="tolerances"):
        integrate(s, IntegrationConfig(rtol=-1.0))
    with pytest.raises(IntegrationError, match="grid_step"):
        integrate(s, IntegrationConfig(grid_step=0.0))
    with pytest.raises(IntegrationError, match="unknown mode"):
        integrate(s, IntegrationConfig(mode="magic"))
    with pytest.raises(IntegrationError, match="t_end"):
        integrate(s, IntegrationConfig(t_end=-2.0))


def test_integrate_rejects_invalid_scenario(quick_config):
    s = tiny_scenario()
    bad = dataclasses.replace(s, surfaces=(dataclasses.replace(s.surfaces[0], area=-1.0),))
    with pytest.raises(ScenarioValidationError):
        integrate(bad, quick_config)


def test_integrate_is_deterministic(quick_config):
    a = integrate(case_study_1(), quick_config)
    b = integrate(case_study_1(), quick_config)
    assert np.array_equal(a.states, b.states)
    assert a.digest == b.digest
    assert a.events == b.events


def test_grid_and_overrides(quick_config):
    s = tiny_scenario()
    result = integrate(s, IntegrationConfig(grid_step=0.05, t_end=1.0))
    assert result.times[0] == 0.0 and result.times[-1] == 1.0
    assert len(result.times) == 21

    # a horizon that is not a multiple of the step still ends exactly at t_end
    ragged = integrate(s, IntegrationConfig(grid_step=0.3, t_end=2.0))
    assert ragged.times[-1] == 2.0
    assert np.all(np.diff(ragged.times) > 0)


def test_value_at_interpolates(quick_config):
    result = integrate(_decay_scenario(), quick_config)
    desk = result.series("desk")
    mid = result.value_at("desk", 0.025)
    assert mid == pytest.approx(0.5 * (desk[0] + desk[1]), rel=1e-12)


def test_surface_concentration_is_load_per_area(quick_config):
    result = integrate(_decay_scenario(), quick_config)
    assert np.allclose(
        result.surface_concentration("desk"), result.series("desk") / 5000.0, rtol=1e-12
    )
