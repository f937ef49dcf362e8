"""Structural model properties that hold for any reasonable scenario."""

import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tripath.fixtures import case_study_1, case_study_3
from tripath.integrator import IntegrationConfig, integrate

from conftest import tiny_scenario

QUICK = IntegrationConfig(grid_step=0.1)


def _with_carrier_exit(scenario, exit_time: float):
    patched = tuple(
        dataclasses.replace(p, duration=exit_time) if p.id == "carrier" else p
        for p in scenario.individuals
    )
    return dataclasses.replace(scenario, individuals=patched)


# -- presence gating -----------------------------------------------------------


def test_doses_flat_before_susceptible_entry():
    s = tiny_scenario(susceptible_entry=1.0, initial_mucosa_load=1.0e6)
    result = integrate(s, QUICK)
    before = result.times <= 1.0
    for pathway in ("fomite", "aerosol", "close_contact"):
        assert np.all(np.abs(result.dose("visitor", pathway)[before]) <= 1e-12)
    assert np.all(np.abs(result.series("hand:visitor")[before]) <= 1e-12)
    # exposure starts once the visitor is in the room
    assert result.total_dose("visitor")[-1] > 0.0


def test_close_contact_dose_flat_after_carrier_exit():
    s = _with_carrier_exit(tiny_scenario(initial_mucosa_load=1.0e6), 1.0)
    result = integrate(s, QUICK)
    after = result.times >= 1.0
    cc = result.dose("visitor", "close_contact")
    assert np.all(np.abs(cc[after] - cc[after][0]) <= 1e-9 * max(cc[-1], 1.0))
    # fomite exposure keeps accruing from what is already on the surfaces
    fomite = result.dose("visitor", "fomite")
    assert fomite[-1] > fomite[after][0]


@settings(max_examples=10, deadline=None)
@given(entry=st.floats(0.25, 1.5))
def test_gating_property_for_any_entry_time(entry):
    s = tiny_scenario(susceptible_entry=entry, initial_mucosa_load=1.0e6)
    result = integrate(s, IntegrationConfig(grid_step=0.25))
    before = result.times < entry
    assert np.all(np.abs(result.total_dose("visitor")[before]) <= 1e-12)


# -- frozen infected mucosa -------------------------------------------------------


def test_infected_mucosa_stays_at_initial_load():
    s = tiny_scenario(initial_mucosa_load=1.0e6)
    result = integrate(s, QUICK)
    assert np.allclose(result.series("mucosa:carrier"), 1.0e6, rtol=1e-12, atol=0.0)


def test_infected_mucosa_frozen_in_case_study_1():
    result = integrate(case_study_1(), QUICK)
    assert np.allclose(result.series("mucosa:infected"), 4.0e6, rtol=1e-12, atol=0.0)


# -- null sources ------------------------------------------------------------------


def test_no_infected_no_initial_load_stays_empty():
    result = integrate(tiny_scenario(with_infected=False), QUICK)
    assert np.all(result.states == 0.0)


def test_environmental_load_reaches_only_the_fomite_pathway():
    result = integrate(tiny_scenario(with_infected=False, initial_load=1.0e6), QUICK)
    assert result.dose("visitor", "fomite")[-1] > 0.0
    assert np.all(result.dose("visitor", "aerosol") == 0.0)
    assert np.all(result.dose("visitor", "close_contact") == 0.0)


# -- monotone accumulators -----------------------------------------------------------


def test_doses_and_ledger_nondecreasing():
    result = integrate(case_study_1(), QUICK)
    columns = list(result.layout.dose_index.values()) + list(result.layout.ledger_index.values())
    for column in columns:
        series = result.states[:, column]
        slack = 1e-9 * max(float(series[-1]), 1.0)
        assert np.all(np.diff(series) >= -slack)


# -- linearity in the source ----------------------------------------------------------


def test_outputs_scale_linearly_with_shedding():
    base = integrate(tiny_scenario(shedding_rate=1.0e6), QUICK)
    double = integrate(tiny_scenario(shedding_rate=2.0e6), QUICK)
    assert np.allclose(double.states, 2.0 * base.states, rtol=1e-6, atol=1e-6)


@settings(max_examples=8, deadline=None)
@given(scale=st.floats(0.1, 10.0))
def test_linearity_property(scale):
    config = IntegrationConfig(grid_step=0.25)
    base = integrate(tiny_scenario(shedding_rate=1.0e6), config)
    scaled = integrate(tiny_scenario(shedding_rate=scale * 1.0e6), config)
    final_base = base.total_dose("visitor")[-1]
    final_scaled = scaled.total_dose("visitor")[-1]
    assert final_scaled == pytest.approx(scale * final_base, rel=1e-6)


# -- mode agreement ---------------------------------------------------------------------


def test_modes_agree_with_interior_entry_and_exit():
    s = _with_carrier_exit(
        tiny_scenario(susceptible_entry=0.3, initial_mucosa_load=1.0e6), 1.4
    )
    exact = integrate(s, IntegrationConfig(grid_step=0.1))
    smoothed = integrate(s, IntegrationConfig(grid_step=0.1, mode="smoothed", epsilon=1e-3))
    assert smoothed.total_dose("visitor")[-1] == pytest.approx(
        exact.total_dose("visitor")[-1], rel=1e-2
    )
    assert smoothed.series("desk")[-1] == pytest.approx(
        exact.series("desk")[-1], rel=1e-2
    )


# -- physical sanity -----------------------------------------------------------------------


def test_states_stay_nonnegative_within_tolerance():
    for scenario in (case_study_1(), case_study_3()):
        result = integrate(scenario, QUICK)
        assert result.states.min() >= -result.config.atol
