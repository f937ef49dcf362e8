"""Shared builders and solver settings for the test suite."""

import pytest

from tripath.integrator import IntegrationConfig
from tripath.scenario import (
    CleaningPolicy,
    CloseContactSpec,
    ContactSpec,
    Individual,
    Scenario,
    Setting,
    Surface,
    hand_ref,
    mucosa_ref,
)


def tiny_scenario(
    *,
    observation_end: float = 2.0,
    initial_load: float = 0.0,
    cleaning: CleaningPolicy | None = None,
    hand_wash: CleaningPolicy | None = None,
    shedding_rate: float = 1.0e6,
    initial_mucosa_load: float = 0.0,
    fraction_large_droplets: float = 0.5,
    with_infected: bool = True,
    susceptible_entry: float = 0.0,
    susceptible_duration: float | None = None,
) -> Scenario:
    """One desk, one susceptible and (optionally) one infected.

    Small enough that every run takes milliseconds, structured enough
    to exercise all three pathways.
    """
    susceptible = Individual(
        id="visitor",
        infected=False,
        entry_time=susceptible_entry,
        duration=observation_end - susceptible_entry
        if susceptible_duration is None
        else susceptible_duration,
        hand_wash=hand_wash,
    )
    individuals = [susceptible]
    close_contacts: list[CloseContactSpec] = []
    if with_infected:
        individuals.append(
            Individual(
                id="carrier",
                infected=True,
                entry_time=0.0,
                duration=observation_end,
                shedding_rate=shedding_rate,
                fraction_large_droplets=fraction_large_droplets,
                initial_mucosa_load=initial_mucosa_load,
                hand_wash=hand_wash,
            )
        )
        close_contacts = [
            CloseContactSpec("carrier", "desk", 0.5, 0.3),
            CloseContactSpec("carrier", hand_ref("visitor"), 0.4, 0.1),
            CloseContactSpec("carrier", mucosa_ref("visitor"), 0.4, 0.02),
        ]
    desk = Surface(
        id="desk",
        area=5000.0,
        material="nonporous",
        cleaning=cleaning,
        initial_load=initial_load,
    )
    contacts = [
        ContactSpec(hand_ref(p.id), "desk", 4.0, 20.0, 0.12, 0.07) for p in individuals
    ]
    return Scenario(
        setting=Setting(air_volume=30.0, ventilation_flow=30.0, observation_end=observation_end),
        surfaces=(desk,),
        individuals=tuple(individuals),
        contacts=tuple(contacts),
        close_contacts=tuple(close_contacts),
    )


@pytest.fixture(scope="session")
def quick_config() -> IntegrationConfig:
    """Coarser output grid; solver tolerances unchanged."""
    return IntegrationConfig(grid_step=0.05)
