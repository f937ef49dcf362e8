"""Indicators, state layout, and right-hand side assembly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tripath.dynamics import (
    DOSE_PATHWAYS,
    LEDGER_FIELDS,
    IndicatorSpec,
    StateLayout,
    TransmissionModel,
    indicator,
    model_for,
    smoothed_delta,
)
from tripath.fixtures import case_study_1
from tripath.kernels import LN2
from tripath.scenario import hand_ref, mucosa_ref

SHEDDING = 1.13015e7
C_M2H = 0.5 * 16.0 * 7.67 / 391.7  # mucosa -> hand touch constant, 1/h
C_H2M = 0.5 * 16.0 * 7.67 / 147.02  # hand -> mucosa touch constant, 1/h
K_HAND = LN2 / 3.5


# -- presence indicators ------------------------------------------------------


def test_sharp_indicator_is_closed_window():
    spec = IndicatorSpec(entry_time=1.0, duration=3.0)
    assert indicator(spec, 0.999) == 0.0
    assert indicator(spec, 1.0) == 1.0
    assert indicator(spec, 2.5) == 1.0
    assert indicator(spec, 4.0) == 1.0
    assert indicator(spec, 4.001) == 0.0


def test_smoothed_indicator_trapezoid_shape():
    eps = 0.01
    spec = IndicatorSpec(entry_time=1.0, duration=3.0, epsilon=eps, mode="smoothed")
    assert indicator(spec, 1.0) == 0.0
    assert indicator(spec, 1.0 + eps / 2) == pytest.approx(0.5, rel=1e-12)
    assert indicator(spec, 1.0 + eps) == 1.0
    assert indicator(spec, 2.5) == 1.0
    # nominal exit still fully present (up to roundoff in the ramp argument)
    assert indicator(spec, 4.0) == pytest.approx(1.0, abs=1e-12)
    assert indicator(spec, 4.0 + eps / 2) == pytest.approx(0.5, abs=1e-12)
    assert indicator(spec, 4.0 + eps) == 0.0


def test_smoothed_indicator_integrates_to_duration():
    eps = 0.01
    spec = IndicatorSpec(entry_time=1.0, duration=3.0, epsilon=eps, mode="smoothed")
    # piecewise linear: the trapezoid rule on kink-aligned nodes is exact
    kinks = [0.0, 1.0, 1.0 + eps, 4.0, 4.0 + eps, 5.0]
    grid = np.unique(np.concatenate([np.linspace(a, b, 9) for a, b in zip(kinks, kinks[1:])]))
    values = np.array([indicator(spec, t) for t in grid])
    assert np.trapezoid(values, grid) == pytest.approx(3.0, rel=1e-12)


def test_smoothed_delta_unit_mass():
    eps = 0.02
    center = 2.0
    assert smoothed_delta(center, center, eps) == pytest.approx(1.0 / eps, rel=1e-12)
    assert smoothed_delta(center - eps, center, eps) == 0.0
    assert smoothed_delta(center + eps, center, eps) == 0.0
    grid = np.unique(np.concatenate([
        np.linspace(center - eps, center, 33), np.linspace(center, center + eps, 33),
    ]))
    values = np.array([smoothed_delta(t, center, eps) for t in grid])
    assert np.trapezoid(values, grid) == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    entry=st.floats(0.0, 10.0),
    duration=st.floats(0.5, 10.0),
    t=st.floats(-1.0, 25.0),
)
def test_indicator_bounded(entry, duration, t):
    for mode in ("sharp", "smoothed"):
        value = indicator(IndicatorSpec(entry, duration, 1e-3, mode), t)
        assert 0.0 <= value <= 1.0


# -- state layout --------------------------------------------------------------


def test_layout_size_and_order():
    s = case_study_1()
    layout = StateLayout(s)
    # 3 surfaces + 2 hands + 2 mucosae + air + 3 doses + 9 ledger slots
    assert layout.size == 3 + 2 + 2 + 1 + 3 * 1 + 9
    labels = layout.state_labels()
    assert len(labels) == layout.size
    assert labels[:3] == ["document", "desk", "door-handle"]
    assert labels[3:5] == ["hand:infected", "hand:susceptible"]
    assert labels[5:7] == ["mucosa:infected", "mucosa:susceptible"]
    assert labels[7] == "air"
    assert labels[8:11] == [
        "dose_fomite:susceptible",
        "dose_aerosol:susceptible",
        "dose_close_contact:susceptible",
    ]
    assert tuple(labels[11:]) == LEDGER_FIELDS


def test_layout_index_of():
    layout = StateLayout(case_study_1())
    assert layout.index_of("desk") == 1
    assert layout.index_of(hand_ref("susceptible")) == 4
    assert layout.index_of(mucosa_ref("infected")) == 5
    assert layout.index_of("air") == 7
    assert DOSE_PATHWAYS == ("fomite", "aerosol", "close_contact")
    assert layout.dose_index[("susceptible", "aerosol")] == 9
    with pytest.raises(KeyError):
        layout.index_of("window")


# -- initial state ---------------------------------------------------------------


def test_initial_state_seeds():
    s = case_study_1()
    model = TransmissionModel(s)
    y0 = model.initial_state()
    L = model.layout

    assert y0[L.mucosa_index["infected"]] == 4.0e6
    assert y0[L.mucosa_index["susceptible"]] == 0.0
    assert y0[L.hand_index["susceptible"]] == 0.0
    assert y0[L.air] == 0.0
    assert all(y0[L.surface_index[f.id]] == 0.0 for f in s.surfaces)
    assert all(y0[i] == 0.0 for i in L.dose_index.values())
    assert all(y0[i] == 0.0 for i in L.ledger_index.values())

    # infected hands start at the mucosa-exchange equilibrium
    self_deposit = 1.0 * 0.30 * 0.5 * SHEDDING
    expected_hand = (C_M2H * 4.0e6 + self_deposit) / (C_H2M + K_HAND)
    assert y0[L.hand_index["infected"]] == pytest.approx(expected_hand, rel=1e-12)


# -- right-hand side: spot rows ----------------------------------------------------


@pytest.fixture(scope="module")
def cs1_model():
    return TransmissionModel(case_study_1())


def test_rhs_air_row_while_both_present(cs1_model):
    y0 = cs1_model.initial_state()
    dy = cs1_model.rhs_sharp(2.0, y0)
    # empty air: only the aerosol source term remains
    assert dy[cs1_model.layout.air] == pytest.approx(0.5 * SHEDDING, rel=1e-12)
    assert dy[cs1_model.layout.ledger_index["shed_aerosol"]] == pytest.approx(
        0.5 * SHEDDING, rel=1e-12
    )


def test_rhs_frozen_infected_mucosa(cs1_model):
    y0 = cs1_model.initial_state()
    for t in (0.5, 2.0, 3.9):
        dy = cs1_model.rhs_sharp(t, y0)
        assert dy[cs1_model.layout.mucosa_index["infected"]] == 0.0


def test_rhs_infected_hand_row_at_equilibrium(cs1_model):
    L = cs1_model.layout
    y0 = cs1_model.initial_state()
    dy = cs1_model.rhs_sharp(2.0, y0)
    # mucosa exchange and decay cancel by construction; what remains is
    # the drain onto the three still-clean surfaces
    drain = (
        0.80 * 5.0 * 36.8 / 147.02
        + 0.12 * 20.0 * 73.5 / 147.02
        + 0.16 * 1.0 * 36.0 / 147.02
    )
    assert dy[L.hand_index["infected"]] == pytest.approx(
        -drain * y0[L.hand_index["infected"]], rel=1e-10
    )


def test_rhs_ledger_shed_contact_row(cs1_model):
    y0 = cs1_model.initial_state()
    dy = cs1_model.rhs_sharp(2.0, y0)
    assert dy[cs1_model.layout.ledger_index["shed_contact"]] == pytest.approx(
        C_M2H * 4.0e6, rel=1e-12
    )


def test_rhs_desk_row_sources(cs1_model):
    L = cs1_model.layout
    y0 = cs1_model.initial_state()
    dy = cs1_model.rhs_sharp(2.0, y0)
    ld = 0.9 * 0.4 * 0.5 * SHEDDING
    touch_in = 0.12 * 20.0 * 73.5 / 147.02 * y0[L.hand_index["infected"]]
    assert dy[L.surface_index["desk"]] == pytest.approx(ld + touch_in, rel=1e-10)


def test_rhs_susceptible_rows_droplet_sources(cs1_model):
    L = cs1_model.layout
    y0 = cs1_model.initial_state()
    dy = cs1_model.rhs_sharp(2.0, y0)
    mucosa_ld = 0.9 * 0.003 * 0.5 * SHEDDING
    hand_ld = 0.9 * 0.30 * 0.5 * SHEDDING
    assert dy[L.mucosa_index["susceptible"]] == pytest.approx(mucosa_ld, rel=1e-12)
    assert dy[L.dose_index[("susceptible", "close_contact")]] == pytest.approx(
        mucosa_ld, rel=1e-12
    )
    assert dy[L.hand_index["susceptible"]] == pytest.approx(hand_ld, rel=1e-12)
    # clean hands and clean air: no fomite or aerosol dose flux yet
    assert dy[L.dose_index[("susceptible", "fomite")]] == 0.0
    assert dy[L.dose_index[("susceptible", "aerosol")]] == 0.0


def test_rhs_gating_after_infected_exit(cs1_model):
    L = cs1_model.layout
    y = cs1_model.initial_state()
    y[L.air] = 1.0e5
    dy = cs1_model.rhs_sharp(6.0, y)  # infected left at t = 4
    assert dy[L.ledger_index["shed_aerosol"]] == 0.0
    assert dy[L.ledger_index["shed_ld"]] == 0.0
    assert dy[L.ledger_index["shed_contact"]] == 0.0
    assert dy[L.dose_index[("susceptible", "close_contact")]] == 0.0
    assert dy[L.ledger_index["inhaled_infected"]] == 0.0
    # the susceptible keeps breathing contaminated air
    assert dy[L.dose_index[("susceptible", "aerosol")]] == pytest.approx(
        0.39 * 1.0e5 / 40.0, rel=1e-12
    )


def test_rhs_nobody_present_only_environmental_decay(cs1_model):
    L = cs1_model.layout
    y = np.zeros(L.size)
    y[L.surface_index["desk"]] = 1.0e6
    y[L.air] = 1.0e4
    dy = cs1_model.rhs_sharp(10.0, y)  # past everyone's exit
    assert dy[L.surface_index["desk"]] == pytest.approx(-LN2 / 6.81 * 1.0e6, rel=1e-12)
    assert dy[L.air] == pytest.approx(-(40.0 / 40.0 + LN2 / 1.1) * 1.0e4, rel=1e-12)
    for pid in ("infected", "susceptible"):
        assert dy[L.hand_index[pid]] == 0.0


# -- presence-pattern operators ------------------------------------------------------


def test_operator_for_pattern_air_column(cs1_model):
    A, b = cs1_model.operator_for_pattern((1, 1))
    air = cs1_model.layout.air
    lam = 40.0 / 40.0 + LN2 / 1.1 + 2 * 0.39 / 40.0
    assert A[air, air] == pytest.approx(-lam, rel=1e-12)
    assert b[air] == pytest.approx(0.5 * SHEDDING, rel=1e-12)

    A, b = cs1_model.operator_for_pattern((0, 1))
    assert A[air, air] == pytest.approx(-(40.0 / 40.0 + LN2 / 1.1 + 0.39 / 40.0), rel=1e-12)
    assert b[air] == 0.0


def test_operator_cache_returns_same_arrays(cs1_model):
    first = cs1_model.operator_for_pattern((1, 1))
    again = cs1_model.operator_for_pattern((1, 1))
    assert first[0] is again[0] and first[1] is again[1]


def test_model_for_is_cached():
    assert model_for(case_study_1()) is model_for(case_study_1())


def test_rhs_rejects_wrong_state_size(cs1_model):
    from tripath.errors import ModelError

    with pytest.raises(ModelError, match="layout needs"):
        cs1_model.rhs_sharp(1.0, np.zeros(3))


# -- smoothed pulses --------------------------------------------------------------


def test_smoothed_rhs_cleaning_pulse():
    import dataclasses

    from tripath.scenario import CleaningPolicy

    from conftest import tiny_scenario

    s = tiny_scenario(
        cleaning=CleaningPolicy(mode="discrete", lrv=2.0, event_times=(1.0,))
    )
    s = dataclasses.replace(s, event_mode="smoothed", event_smoothing_epsilon=1e-3)
    model = TransmissionModel(s)
    L = model.layout
    y = np.zeros(L.size)
    y[L.surface_index["desk"]] = 1.0e6

    eps = 1e-3
    away = model.rhs_smoothed(0.5, y, eps)
    at_peak = model.rhs_smoothed(1.0, y, eps)
    pulse = 2.0 * np.log(10.0) * (1.0 / eps) * 1.0e6
    assert at_peak[L.surface_index["desk"]] - away[L.surface_index["desk"]] == pytest.approx(
        -pulse, rel=1e-9
    )
    assert at_peak[L.ledger_index["cleaned"]] - away[L.ledger_index["cleaned"]] == pytest.approx(
        pulse, rel=1e-9
    )
