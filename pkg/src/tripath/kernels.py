"""Pure rate kernels: every additive term of the model's right-hand sides.

Each kernel computes one physical rate from an immutable
:class:`RateContext` and the current load of a single compartment, so
each can be tested against hand-computed values in isolation.  All
kernels are homogeneous of degree one in their load argument and return
nonnegative rates for nonnegative loads.

Presence gating is deliberately absent here: kernels report the rate as
if both parties were present, and the dynamics layer multiplies by the
presence indicators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from tripath.errors import ContractError
from tripath.scenario import (
    AIR_REF,
    CleaningPolicy,
    Individual,
    Scenario,
    Setting,
    Surface,
    hand_ref,
    mucosa_ref,
    ref_owner,
)

LN2 = math.log(2.0)
LN10 = math.log(10.0)


@dataclass(frozen=True)
class RateContext:
    """Precomputed per-scenario rate constants.

    ``transfer`` maps ordered compartment pairs (donor, acceptor) to the
    touch-transfer rate constant
    ``c = transfer_fraction * frequency * contact_area / donor_area``
    in 1/h; both directions of every permitted pair are present.
    ``inactivation`` maps every tracked compartment (surfaces, hands,
    mucosae and air) to ``ln(2) / half_life`` in 1/h.
    ``ld_coefficient`` maps (emitter id, acceptor reference) to the
    dimensionless ``time_fraction * landing_fraction *
    fraction_large_droplets * (1 - mask_capture_efficacy)``.
    """

    transfer: dict[tuple[str, str], float]
    inactivation: dict[str, float]
    ld_coefficient: dict[tuple[str, str], float]
    resuspension: dict[str, float]
    deposition_rate_constant: float


def _donor_area(scenario: Scenario, ref: str) -> float:
    owner = ref_owner(ref)
    if owner is None:
        return scenario.surface(ref).area
    person = scenario.individual(owner)
    return person.hand_area if ref.startswith("hand:") else person.mucosa_area


def build_rate_context(scenario: Scenario) -> RateContext:
    """Assemble all rate constants for one scenario.

    Raises:
        ContractError: a contact pairs compartments the model does not
            connect (surface-surface, or hands/mucosae of two people).
    """
    transfer: dict[tuple[str, str], float] = {}

    def add_pair(donor: str, acceptor: str, frequency: float, contact_area: float,
                 forward: float, backward: float) -> None:
        transfer[(donor, acceptor)] = forward * frequency * contact_area / _donor_area(scenario, donor)
        transfer[(acceptor, donor)] = backward * frequency * contact_area / _donor_area(scenario, acceptor)

    surface_ids = {f.id for f in scenario.surfaces}
    for c in scenario.contacts:
        donor_owner, acceptor_owner = ref_owner(c.donor), ref_owner(c.acceptor)
        surface_hand = (
            (c.donor in surface_ids and c.acceptor.startswith("hand:"))
            or (c.acceptor in surface_ids and c.donor.startswith("hand:"))
        )
        own_face = (
            donor_owner is not None
            and donor_owner == acceptor_owner
            and {c.donor, c.acceptor} == {hand_ref(donor_owner), mucosa_ref(donor_owner)}
        )
        if not (surface_hand or own_face):
            raise ContractError(
                f"no transfer path between {c.donor!r} and {c.acceptor!r}: only "
                "surface-hand and hand-own-mucosa contacts exist in the model"
            )
        add_pair(c.donor, c.acceptor, c.frequency, c.contact_area,
                 c.transfer_forward, c.transfer_backward)

    for person in scenario.individuals:
        face = scenario.face_contact(person)
        if (face.donor, face.acceptor) not in transfer:
            add_pair(face.donor, face.acceptor, face.frequency, face.contact_area,
                     face.transfer_forward, face.transfer_backward)

    inactivation: dict[str, float] = {AIR_REF: LN2 / scenario.half_life("air")}
    for f in scenario.surfaces:
        inactivation[f.id] = LN2 / scenario.half_life(f.material)
    for person in scenario.individuals:
        inactivation[hand_ref(person.id)] = LN2 / scenario.half_life("skin")
        inactivation[mucosa_ref(person.id)] = LN2 / scenario.half_life("mucosa")

    ld_coefficient = {
        (cc.emitter, cc.acceptor): (
            cc.time_fraction
            * cc.landing_fraction
            * scenario.individual(cc.emitter).fraction_large_droplets
            * (1.0 - scenario.individual(cc.emitter).mask_capture_efficacy)
        )
        for cc in scenario.close_contacts
    }

    return RateContext(
        transfer=transfer,
        inactivation=inactivation,
        ld_coefficient=ld_coefficient,
        resuspension={f.id: f.resuspension_rate for f in scenario.surfaces},
        deposition_rate_constant=scenario.deposition_rate_constant,
    )


def fomite_transfer_rate(ctx: RateContext, donor: str, acceptor: str, load: float) -> float:
    """Touch transfer from donor to acceptor, in viral particles per hour.

    Raises:
        ContractError: (donor, acceptor) is not a connected pair.
    """
    try:
        coefficient = ctx.transfer[(donor, acceptor)]
    except KeyError:
        raise ContractError(f"no transfer path from {donor!r} to {acceptor!r}") from None
    return coefficient * load


def aerosol_emission_rate(individual: Individual) -> float:
    """Small-droplet (airborne) emission, in viral particles per hour."""
    return (
        (1.0 - individual.fraction_large_droplets)
        * individual.shedding_rate
        * (1.0 - individual.mask_aerosol_efficacy)
    )


def ld_deposition_rate(ctx: RateContext, emitter: Individual, acceptor: str) -> float:
    """Large-droplet deposition from emitter onto acceptor, particles per hour.

    Pairs without a close-contact entry have no droplet route and
    contribute zero.
    """
    return ctx.ld_coefficient.get((emitter.id, acceptor), 0.0) * emitter.shedding_rate


def sd_deposition_rate(ctx: RateContext, surface: Surface, air_load: float, air_volume: float) -> float:
    """Small-droplet settling from air onto one surface, particles per hour."""
    return ctx.deposition_rate_constant * surface.area * air_load / air_volume


def inactivation_rate(ctx: RateContext, compartment: str, load: float) -> float:
    """Natural decay of the load on one compartment, particles per hour.

    Raises:
        ContractError: unknown compartment reference.
    """
    try:
        coefficient = ctx.inactivation[compartment]
    except KeyError:
        raise ContractError(f"unknown compartment {compartment!r}") from None
    return coefficient * load


def continuous_cleaning_rate(policy: CleaningPolicy, load: float) -> float:
    """Removal rate of a continuous cleaning policy, particles per hour.

    Raises:
        ContractError: policy is not continuous-mode.
    """
    if policy.mode != "continuous":
        raise ContractError("continuous_cleaning_rate requires a continuous-mode policy")
    return policy.lrv * LN10 * policy.frequency * load


def discrete_cleaning_jump(policy: CleaningPolicy, load: float) -> float:
    """Load remaining after one discrete cleaning application.

    Raises:
        ContractError: policy is not discrete-mode.
    """
    if policy.mode != "discrete":
        raise ContractError("discrete_cleaning_jump requires a discrete-mode policy")
    return load * 10.0 ** (-policy.lrv)


def inhalation_rate(individual: Individual, air_load: float, air_volume: float) -> float:
    """Respiratory uptake from the air compartment, particles per hour."""
    return individual.respiration_rate * air_load / air_volume


def ventilation_rate(setting: Setting, air_load: float) -> float:
    """Removal of airborne virus by outdoor-air exchange, particles per hour."""
    return setting.ventilation_flow * air_load / setting.air_volume


__all__ = [
    "LN2",
    "LN10",
    "RateContext",
    "aerosol_emission_rate",
    "build_rate_context",
    "continuous_cleaning_rate",
    "discrete_cleaning_jump",
    "fomite_transfer_rate",
    "inactivation_rate",
    "inhalation_rate",
    "ld_deposition_rate",
    "sd_deposition_rate",
    "ventilation_rate",
]
