"""Scenario model: immutable types, document parsing, validation, serialization.

A scenario is a complete description of an enclosed setting: the room,
its surfaces, the people and their schedules, the touch network between
hands and surfaces, and the close-contact geometry that routes large
droplets.  Scenarios are plain frozen dataclasses so they can be hashed,
compared and safely shared between worker processes.

Canonical units throughout: time in hours, viral load in viral
particles, areas in cm^2, air volume in m^3.  The document parser
rejects values expressed in anything else (strings with unit suffixes
are not accepted).

Compartment references in documents and rate tables use the forms
``"<surface-id>"``, ``"hand:<individual-id>"`` and
``"mucosa:<individual-id>"``; the ambient air compartment is ``"air"``.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass
from typing import Any

import yaml

from tripath.errors import ScenarioValidationError, SchemaError

HAND_PREFIX = "hand:"
MUCOSA_PREFIX = "mucosa:"
AIR_REF = "air"

#: Half-lives in hours for the built-in material classes.
DEFAULT_MATERIAL_HALF_LIVES = {
    "porous": 3.46,
    "nonporous": 6.81,
    "stainless-steel": 5.63,
    "skin": 3.5,
    "mucosa": 3.5,
    "air": 1.1,
}

_ID_ALLOWED = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_")


def hand_ref(individual_id: str) -> str:
    return HAND_PREFIX + individual_id


def mucosa_ref(individual_id: str) -> str:
    return MUCOSA_PREFIX + individual_id


def ref_owner(ref: str) -> str | None:
    """Individual id behind a hand/mucosa reference, or None for surfaces/air."""
    for prefix in (HAND_PREFIX, MUCOSA_PREFIX):
        if ref.startswith(prefix):
            return ref[len(prefix):]
    return None


@dataclass(frozen=True)
class Setting:
    """The enclosed, well-mixed setting."""

    air_volume: float  #: m^3
    ventilation_flow: float  #: m^3/h of outside air
    observation_end: float  #: h, end of the simulated window


@dataclass(frozen=True)
class Material:
    """A named material class with a viral half-life on it."""

    name: str
    half_life: float  #: h


@dataclass(frozen=True)
class CleaningPolicy:
    """Disinfection of one compartment (a surface, or an individual's hands).

    ``discrete`` mode applies instantaneous log reductions at
    ``event_times``; ``continuous`` mode removes load at a steady rate
    of ``lrv * ln(10) * frequency`` per hour.
    """

    mode: str = "discrete"  #: "discrete" | "continuous"
    lrv: float = 0.0  #: log10 reduction value per application
    frequency: float = 0.0  #: 1/h, continuous mode only
    event_times: tuple[float, ...] = ()  #: h, discrete mode only


@dataclass(frozen=True)
class Surface:
    """A fomite surface."""

    id: str
    area: float  #: cm^2
    material: str
    cleaning: CleaningPolicy | None = None  #: None means the surface cannot be disinfected
    initial_load: float = 0.0  #: viral particles at t = 0
    resuspension_rate: float = 0.0  #: 1/h, load fraction returned to air


@dataclass(frozen=True)
class Individual:
    """A person with a single visit to the setting."""

    id: str
    infected: bool
    entry_time: float  #: h
    duration: float  #: h of presence
    hand_area: float = 147.02  #: cm^2, both palms
    mucosa_area: float = 391.7  #: cm^2
    respiration_rate: float = 0.39  #: m^3/h
    shedding_rate: float = 0.0  #: viral particles/h, zero for susceptible
    fraction_large_droplets: float = 0.5  #: share of shedding emitted as large droplets
    mask_capture_efficacy: float = 0.0  #: fraction of large droplets retained by a mask
    mask_aerosol_efficacy: float = 0.0  #: optional aerosol filtration, default none
    initial_mucosa_load: float = 0.0  #: viral particles, infected only
    face_touch_frequency: float = 16.0  #: 1/h, hand to mucosa contacts
    face_contact_area: float = 7.67  #: cm^2 per face touch
    transfer_hand_to_mucosa: float = 0.5
    transfer_mucosa_to_hand: float = 0.5
    dose_response: float = 3.95e5  #: viral particles, exponential dose-response scale
    hand_wash: CleaningPolicy | None = None


@dataclass(frozen=True)
class ContactSpec:
    """A touch pair: surface-hand, or a hand with its own mucosa.

    The touch frequency and contact area are properties of the pair;
    the transfer fractions are directional (``forward`` moves load from
    donor to acceptor).
    """

    donor: str  #: compartment reference
    acceptor: str  #: compartment reference
    frequency: float  #: 1/h
    contact_area: float  #: cm^2
    transfer_forward: float  #: fraction moved donor -> acceptor per contact
    transfer_backward: float  #: fraction moved acceptor -> donor per contact


@dataclass(frozen=True)
class CloseContactSpec:
    """Large-droplet routing from one emitter to one acceptor object.

    ``time_fraction`` is the share of co-presence the emitter spends
    close enough for droplets to reach the acceptor;
    ``landing_fraction`` is the share of emitted large droplets landing
    on the acceptor while in range.
    """

    emitter: str  #: individual id
    acceptor: str  #: compartment reference (surface, hand:<id>, mucosa:<id>)
    time_fraction: float
    landing_fraction: float


@dataclass(frozen=True)
class Scenario:
    """A full simulation input."""

    setting: Setting
    surfaces: tuple[Surface, ...]
    individuals: tuple[Individual, ...]
    contacts: tuple[ContactSpec, ...]
    close_contacts: tuple[CloseContactSpec, ...]
    materials: tuple[Material, ...] = ()  #: overrides and additions to the built-in table
    deposition_rate_constant: float = 0.0  #: m^3/(cm^2 h), small-droplet settling
    event_mode: str = "exact-jump"  #: "exact-jump" | "smoothed"
    event_smoothing_epsilon: float = 1e-3  #: h, ramp half-width in smoothed mode

    # -- lookups ---------------------------------------------------------

    def surface(self, surface_id: str) -> Surface:
        for s in self.surfaces:
            if s.id == surface_id:
                return s
        raise KeyError(surface_id)

    def individual(self, individual_id: str) -> Individual:
        for p in self.individuals:
            if p.id == individual_id:
                return p
        raise KeyError(individual_id)

    def susceptibles(self) -> tuple[Individual, ...]:
        return tuple(p for p in self.individuals if not p.infected)

    def infected(self) -> tuple[Individual, ...]:
        return tuple(p for p in self.individuals if p.infected)

    def half_life(self, material_name: str) -> float:
        for m in self.materials:
            if m.name == material_name:
                return m.half_life
        try:
            return DEFAULT_MATERIAL_HALF_LIVES[material_name]
        except KeyError:
            raise KeyError(f"unknown material {material_name!r}") from None

    def face_contact(self, individual: Individual) -> ContactSpec:
        """The hand-mucosa touch pair for one individual.

        An explicit hand:<id> / mucosa:<id> entry in ``contacts`` takes
        precedence; otherwise the pair is synthesized from the
        individual's face-touch fields.
        """
        h, m = hand_ref(individual.id), mucosa_ref(individual.id)
        for c in self.contacts:
            if {c.donor, c.acceptor} == {h, m}:
                if c.donor == h:
                    return c
                return ContactSpec(h, m, c.frequency, c.contact_area,
                                   c.transfer_backward, c.transfer_forward)
        return ContactSpec(
            donor=h,
            acceptor=m,
            frequency=individual.face_touch_frequency,
            contact_area=individual.face_contact_area,
            transfer_forward=individual.transfer_hand_to_mucosa,
            transfer_backward=individual.transfer_mucosa_to_hand,
        )


# ---------------------------------------------------------------------------
# document parsing
# ---------------------------------------------------------------------------

_NUMBER_MSG = "expected a number in canonical units (hours, viral particles, cm^2, m^3)"


def _require_mapping(node: Any, where: str) -> dict:
    if not isinstance(node, dict):
        raise SchemaError(f"{where}: expected a mapping")
    return node


def _require_list(node: Any, where: str) -> list:
    if not isinstance(node, list):
        raise SchemaError(f"{where}: expected a list")
    return node


def _number(node: Any, where: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise SchemaError(f"{where}: {_NUMBER_MSG}, got {node!r}")
    return float(node)


def _string(node: Any, where: str) -> str:
    if not isinstance(node, str):
        raise SchemaError(f"{where}: expected a string, got {node!r}")
    return node


def _boolean(node: Any, where: str) -> bool:
    if not isinstance(node, bool):
        raise SchemaError(f"{where}: expected true/false, got {node!r}")
    return node


class _Section:
    """One mapping node with strict key accounting."""

    def __init__(self, node: Any, where: str):
        self.node = dict(_require_mapping(node, where))
        self.where = where

    def take(self, key: str, kind, default=_NUMBER_MSG):
        missing = default is _NUMBER_MSG
        if key not in self.node:
            if missing:
                raise SchemaError(f"{self.where}: missing required field {key!r}")
            return default
        value = self.node.pop(key)
        where = f"{self.where}.{key}"
        if kind is float:
            return _number(value, where)
        if kind is str:
            return _string(value, where)
        if kind is bool:
            return _boolean(value, where)
        return value

    def finish(self) -> None:
        if self.node:
            extra = ", ".join(sorted(map(repr, self.node)))
            raise SchemaError(f"{self.where}: unknown field(s) {extra}")


def _parse_cleaning(node: Any, where: str) -> CleaningPolicy | None:
    if node is None:
        return None
    sec = _Section(node, where)
    mode = sec.take("mode", str, "discrete")
    lrv = sec.take("lrv", float)
    frequency = sec.take("frequency", float, 0.0)
    times = sec.take("event_times", list, [])
    sec.finish()
    times = _require_list(times, f"{where}.event_times")
    event_times = tuple(_number(t, f"{where}.event_times[{i}]") for i, t in enumerate(times))
    return CleaningPolicy(mode=mode, lrv=lrv, frequency=frequency, event_times=event_times)


def _parse_setting(node: Any) -> Setting:
    sec = _Section(node, "setting")
    air_volume = sec.take("air_volume", float)
    flow = sec.take("ventilation_flow", float, None)
    ach = sec.take("air_changes_per_hour", float, None)
    observation_end = sec.take("observation_end", float)
    sec.finish()
    if (flow is None) == (ach is None):
        raise SchemaError("setting: give exactly one of ventilation_flow or air_changes_per_hour")
    if flow is None:
        flow = ach * air_volume  # stored canonically as m^3/h
    return Setting(air_volume=air_volume, ventilation_flow=flow, observation_end=observation_end)


def _parse_surface(node: Any, i: int) -> Surface:
    sec = _Section(node, f"surfaces[{i}]")
    surface = Surface(
        id=sec.take("id", str),
        area=sec.take("area", float),
        material=sec.take("material", str),
        cleaning=_parse_cleaning(sec.take("cleaning", dict, None), f"surfaces[{i}].cleaning"),
        initial_load=sec.take("initial_load", float, 0.0),
        resuspension_rate=sec.take("resuspension_rate", float, 0.0),
    )
    sec.finish()
    return surface


def _parse_individual(node: Any, i: int) -> Individual:
    sec = _Section(node, f"individuals[{i}]")
    person = Individual(
        id=sec.take("id", str),
        infected=sec.take("infected", bool),
        entry_time=sec.take("entry_time", float),
        duration=sec.take("duration", float),
        hand_area=sec.take("hand_area", float, 147.02),
        mucosa_area=sec.take("mucosa_area", float, 391.7),
        respiration_rate=sec.take("respiration_rate", float, 0.39),
        shedding_rate=sec.take("shedding_rate", float, 0.0),
        fraction_large_droplets=sec.take("fraction_large_droplets", float, 0.5),
        mask_capture_efficacy=sec.take("mask_capture_efficacy", float, 0.0),
        mask_aerosol_efficacy=sec.take("mask_aerosol_efficacy", float, 0.0),
        initial_mucosa_load=sec.take("initial_mucosa_load", float, 0.0),
        face_touch_frequency=sec.take("face_touch_frequency", float, 16.0),
        face_contact_area=sec.take("face_contact_area", float, 7.67),
        transfer_hand_to_mucosa=sec.take("transfer_hand_to_mucosa", float, 0.5),
        transfer_mucosa_to_hand=sec.take("transfer_mucosa_to_hand", float, 0.5),
        dose_response=sec.take("dose_response", float, 3.95e5),
        hand_wash=_parse_cleaning(sec.take("hand_wash", dict, None), f"individuals[{i}].hand_wash"),
    )
    sec.finish()
    return person


def _parse_contact(node: Any, i: int) -> ContactSpec:
    sec = _Section(node, f"contacts[{i}]")
    contact = ContactSpec(
        donor=sec.take("donor", str),
        acceptor=sec.take("acceptor", str),
        frequency=sec.take("frequency", float),
        contact_area=sec.take("contact_area", float),
        transfer_forward=sec.take("transfer_forward", float),
        transfer_backward=sec.take("transfer_backward", float),
    )
    sec.finish()
    return contact


def _parse_close_contact(node: Any, i: int) -> CloseContactSpec:
    sec = _Section(node, f"close_contacts[{i}]")
    spec = CloseContactSpec(
        emitter=sec.take("emitter", str),
        acceptor=sec.take("acceptor", str),
        time_fraction=sec.take("time_fraction", float),
        landing_fraction=sec.take("landing_fraction", float),
    )
    sec.finish()
    return spec


def parse_document(document: dict) -> Scenario:
    """Build a validated Scenario from an already-loaded document mapping."""
    sec = _Section(document, "scenario")
    setting = _parse_setting(sec.take("setting", dict))
    materials = tuple(
        Material(
            name=_Section(m, f"materials[{i}]").take("name", str),
            half_life=_number(_require_mapping(m, f"materials[{i}]").get("half_life"),
                              f"materials[{i}].half_life"),
        )
        for i, m in enumerate(_require_list(sec.take("materials", list, []), "materials"))
    )
    surfaces = tuple(
        _parse_surface(s, i) for i, s in enumerate(_require_list(sec.take("surfaces", list, []), "surfaces"))
    )
    individuals = tuple(
        _parse_individual(p, i)
        for i, p in enumerate(_require_list(sec.take("individuals", list), "individuals"))
    )
    contacts = tuple(
        _parse_contact(c, i) for i, c in enumerate(_require_list(sec.take("contacts", list, []), "contacts"))
    )
    close_contacts = tuple(
        _parse_close_contact(c, i)
        for i, c in enumerate(_require_list(sec.take("close_contacts", list, []), "close_contacts"))
    )
    scenario = Scenario(
        setting=setting,
        materials=materials,
        surfaces=surfaces,
        individuals=individuals,
        contacts=contacts,
        close_contacts=close_contacts,
        deposition_rate_constant=sec.take("deposition_rate_constant", float, 0.0),
        event_mode=sec.take("event_mode", str, "exact-jump"),
        event_smoothing_epsilon=sec.take("event_smoothing_epsilon", float, 1e-3),
    )
    sec.finish()
    violations = validate(scenario)
    if violations:
        raise ScenarioValidationError(violations)
    return scenario


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document (YAML text)."""
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(f"scenario document is not valid YAML: {exc}") from exc
    if not isinstance(document, dict):
        raise SchemaError("scenario document must be a mapping at the top level")
    return parse_document(document)


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

class ScenarioWarning(UserWarning):
    """Non-fatal scenario finding."""


def _valid_id(identifier: str) -> bool:
    return bool(identifier) and set(identifier) <= _ID_ALLOWED


def _check_policy(policy: CleaningPolicy, where: str, t_end: float, out: list[str]) -> None:
    if policy.mode not in ("discrete", "continuous"):
        out.append(f"{where}: mode must be discrete or continuous, got {policy.mode!r}")
        return
    if policy.lrv < 0:
        out.append(f"{where}: lrv must be >= 0")
    if policy.mode == "continuous":
        if policy.frequency < 0:
            out.append(f"{where}: frequency must be >= 0")
        if policy.event_times:
            out.append(f"{where}: event_times are only meaningful in discrete mode")
    else:
        if policy.frequency:
            out.append(f"{where}: frequency is only meaningful in continuous mode")
        if list(policy.event_times) != sorted(policy.event_times):
            out.append(f"{where}: event_times must be sorted ascending")
        for t in policy.event_times:
            if not 0.0 <= t <= t_end:
                out.append(f"{where}: event time {t} outside the observation window [0, {t_end}]")


def validate(scenario: Scenario) -> list[str]:
    """Check every model invariant; returns violations (empty when valid).

    Soft findings (for example a per-emitter droplet budget above what a
    mask lets through) are emitted as ScenarioWarning instead.
    """
    out: list[str] = []
    s = scenario.setting
    t_end = s.observation_end

    if s.air_volume <= 0:
        out.append("setting.air_volume must be > 0")
    if s.ventilation_flow < 0:
        out.append("setting.ventilation_flow must be >= 0")
    if t_end <= 0:
        out.append("setting.observation_end must be > 0")

    known_materials = dict(DEFAULT_MATERIAL_HALF_LIVES)
    for m in scenario.materials:
        if m.half_life <= 0:
            out.append(f"material {m.name!r}: half_life must be > 0")
        known_materials[m.name] = m.half_life

    surface_ids = [f.id for f in scenario.surfaces]
    individual_ids = [p.id for p in scenario.individuals]
    all_ids = surface_ids + individual_ids
    for identifier in all_ids:
        if not _valid_id(identifier):
            out.append(f"id {identifier!r} may only contain letters, digits, '-' and '_'")
    dupes = {i for i in all_ids if all_ids.count(i) > 1}
    if dupes:
        out.append(f"ids must be unique across surfaces and individuals: {sorted(dupes)}")

    if not scenario.individuals:
        out.append("at least one individual is required")

    for f in scenario.surfaces:
        where = f"surface {f.id!r}"
        if f.area <= 0:
            out.append(f"{where}: area must be > 0")
        if f.material not in known_materials:
            out.append(f"{where}: unknown material {f.material!r}")
        if f.initial_load < 0:
            out.append(f"{where}: initial_load must be >= 0")
        if f.resuspension_rate < 0:
            out.append(f"{where}: resuspension_rate must be >= 0")
        if f.cleaning is not None:
            _check_policy(f.cleaning, f"{where}.cleaning", t_end, out)

    min_duration = None
    for p in scenario.individuals:
        where = f"individual {p.id!r}"
        if p.entry_time < 0:
            out.append(f"{where}: entry_time must be >= 0")
        if p.duration <= 0:
            out.append(f"{where}: duration must be > 0")
        else:
            min_duration = p.duration if min_duration is None else min(min_duration, p.duration)
        if p.entry_time + p.duration > t_end + 1e-12:
            out.append(f"{where}: presence extends past observation_end")
        if p.hand_area <= 0 or p.mucosa_area <= 0:
            out.append(f"{where}: hand_area and mucosa_area must be > 0")
        if p.respiration_rate < 0:
            out.append(f"{where}: respiration_rate must be >= 0")
        if p.shedding_rate < 0:
            out.append(f"{where}: shedding_rate must be >= 0")
        if not p.infected and p.shedding_rate:
            out.append(f"{where}: susceptible individuals must have shedding_rate 0")
        if not p.infected and p.initial_mucosa_load:
            out.append(f"{where}: susceptible individuals must have initial_mucosa_load 0")
        for name in ("fraction_large_droplets", "mask_capture_efficacy", "mask_aerosol_efficacy",
                     "transfer_hand_to_mucosa", "transfer_mucosa_to_hand"):
            value = getattr(p, name)
            if not 0.0 <= value <= 1.0:
                out.append(f"{where}: {name} must be within [0, 1]")
        if p.initial_mucosa_load < 0:
            out.append(f"{where}: initial_mucosa_load must be >= 0")
        if p.face_touch_frequency < 0:
            out.append(f"{where}: face_touch_frequency must be >= 0")
        if p.face_contact_area <= 0:
            out.append(f"{where}: face_contact_area must be > 0")
        elif p.face_contact_area > min(p.hand_area, p.mucosa_area):
            out.append(f"{where}: face_contact_area exceeds hand or mucosa area")
        if p.dose_response <= 0:
            out.append(f"{where}: dose_response must be > 0")
        if p.hand_wash is not None:
            _check_policy(p.hand_wash, f"{where}.hand_wash", t_end, out)

    if scenario.event_smoothing_epsilon <= 0:
        out.append("event_smoothing_epsilon must be > 0")
    if scenario.event_mode not in ("exact-jump", "smoothed"):
        out.append(f"event_mode must be exact-jump or smoothed, got {scenario.event_mode!r}")
    elif scenario.event_mode == "smoothed" and min_duration is not None:
        # ramp width must stay far below the shortest stay
        if scenario.event_smoothing_epsilon > min_duration / 100.0:
            out.append("event_smoothing_epsilon must be at least 100x smaller than the shortest presence duration")

    def ref_kind(ref: str) -> str | None:
        owner = ref_owner(ref)
        if owner is not None:
            kind = "hand" if ref.startswith(HAND_PREFIX) else "mucosa"
            return kind if owner in individual_ids else None
        return "surface" if ref in surface_ids else None

    seen_pairs: set[frozenset] = set()
    for c in scenario.contacts:
        where = f"contact {c.donor!r} <-> {c.acceptor!r}"
        kinds = (ref_kind(c.donor), ref_kind(c.acceptor))
        if None in kinds:
            out.append(f"{where}: unknown compartment reference")
            continue
        pair = frozenset((c.donor, c.acceptor))
        if pair in seen_pairs:
            out.append(f"{where}: duplicate contact pair")
        seen_pairs.add(pair)
        if set(kinds) == {"surface", "hand"}:
            pass
        elif set(kinds) == {"hand", "mucosa"}:
            if ref_owner(c.donor) != ref_owner(c.acceptor):
                out.append(f"{where}: mucosa contacts are allowed with the owner's hands only")
        else:
            out.append(f"{where}: only surface-hand and hand-own-mucosa contacts are permitted")
            continue
        if c.frequency < 0:
            out.append(f"{where}: frequency must be >= 0")
        if not 0.0 <= c.transfer_forward <= 1.0 or not 0.0 <= c.transfer_backward <= 1.0:
            out.append(f"{where}: transfer fractions must be within [0, 1]")
        areas = []
        for ref in (c.donor, c.acceptor):
            owner = ref_owner(ref)
            if owner is None:
                areas.append(scenario.surface(ref).area)
            elif ref.startswith(HAND_PREFIX):
                areas.append(scenario.individual(owner).hand_area)
            else:
                areas.append(scenario.individual(owner).mucosa_area)
        if c.contact_area <= 0:
            out.append(f"{where}: contact_area must be > 0")
        elif c.contact_area > min(areas):
            out.append(f"{where}: contact_area exceeds the smaller endpoint area")

    surface_landing: dict[str, float] = {}
    total_landing: dict[str, float] = {}
    seen_cc: set[tuple[str, str]] = set()
    for cc in scenario.close_contacts:
        where = f"close contact {cc.emitter!r} -> {cc.acceptor!r}"
        if cc.emitter not in individual_ids:
            out.append(f"{where}: unknown emitter")
            continue
        if ref_kind(cc.acceptor) is None:
            out.append(f"{where}: unknown acceptor reference")
            continue
        if cc.acceptor == mucosa_ref(cc.emitter):
            out.append(f"{where}: droplets do not land on the emitter's own mucosa")
        key = (cc.emitter, cc.acceptor)
        if key in seen_cc:
            out.append(f"{where}: duplicate close-contact pair")
        seen_cc.add(key)
        if not 0.0 <= cc.time_fraction <= 1.0:
            out.append(f"{where}: time_fraction must be within [0, 1]")
        if not 0.0 <= cc.landing_fraction <= 1.0:
            out.append(f"{where}: landing_fraction must be within [0, 1]")
        total_landing[cc.emitter] = total_landing.get(cc.emitter, 0.0) + cc.landing_fraction
        if ref_kind(cc.acceptor) == "surface":
            surface_landing[cc.emitter] = surface_landing.get(cc.emitter, 0.0) + cc.landing_fraction

    # The hard budget covers inanimate objects only: those fractions apply
    # simultaneously, while hand/mucosa landings are conditional on facing
    # that person and may legitimately push the naive total past 1.
    for emitter_id, total in surface_landing.items():
        if total > 1.0 + 1e-12:
            out.append(f"individual {emitter_id!r}: landing fractions over surfaces sum to {total:.3f} > 1")
    for emitter_id, total in total_landing.items():
        try:
            emitter = scenario.individual(emitter_id)
        except KeyError:
            continue
        if total > 1.0 - emitter.mask_capture_efficacy + 1e-12:
            warnings.warn(
                f"individual {emitter_id!r}: landing fractions sum to {total:.3f}, above the "
                f"{1.0 - emitter.mask_capture_efficacy:.3f} the mask lets through",
                ScenarioWarning,
                stacklevel=2,
            )
    if scenario.deposition_rate_constant < 0:
        out.append("deposition_rate_constant must be >= 0")
    return out


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _policy_document(policy: CleaningPolicy | None):
    if policy is None:
        return None
    doc = {"mode": policy.mode, "lrv": policy.lrv}
    if policy.mode == "continuous":
        doc["frequency"] = policy.frequency
    else:
        doc["event_times"] = list(policy.event_times)
    return doc


def scenario_to_document(scenario: Scenario) -> dict:
    """Plain document mapping, the inverse of parse_document."""
    doc: dict[str, Any] = {
        "setting": {
            "air_volume": scenario.setting.air_volume,
            "ventilation_flow": scenario.setting.ventilation_flow,
            "observation_end": scenario.setting.observation_end,
        }
    }
    if scenario.materials:
        doc["materials"] = [{"name": m.name, "half_life": m.half_life} for m in scenario.materials]
    doc["surfaces"] = []
    for f in scenario.surfaces:
        node: dict[str, Any] = {"id": f.id, "area": f.area, "material": f.material}
        if f.cleaning is not None:
            node["cleaning"] = _policy_document(f.cleaning)
        if f.initial_load:
            node["initial_load"] = f.initial_load
        if f.resuspension_rate:
            node["resuspension_rate"] = f.resuspension_rate
        doc["surfaces"].append(node)
    doc["individuals"] = []
    for p in scenario.individuals:
        node = {
            "id": p.id,
            "infected": p.infected,
            "entry_time": p.entry_time,
            "duration": p.duration,
            "hand_area": p.hand_area,
            "mucosa_area": p.mucosa_area,
            "respiration_rate": p.respiration_rate,
            "shedding_rate": p.shedding_rate,
            "fraction_large_droplets": p.fraction_large_droplets,
            "mask_capture_efficacy": p.mask_capture_efficacy,
            "mask_aerosol_efficacy": p.mask_aerosol_efficacy,
            "initial_mucosa_load": p.initial_mucosa_load,
            "face_touch_frequency": p.face_touch_frequency,
            "face_contact_area": p.face_contact_area,
            "transfer_hand_to_mucosa": p.transfer_hand_to_mucosa,
            "transfer_mucosa_to_hand": p.transfer_mucosa_to_hand,
            "dose_response": p.dose_response,
        }
        if p.hand_wash is not None:
            node["hand_wash"] = _policy_document(p.hand_wash)
        doc["individuals"].append(node)
    doc["contacts"] = [
        {
            "donor": c.donor,
            "acceptor": c.acceptor,
            "frequency": c.frequency,
            "contact_area": c.contact_area,
            "transfer_forward": c.transfer_forward,
            "transfer_backward": c.transfer_backward,
        }
        for c in scenario.contacts
    ]
    doc["close_contacts"] = [
        {
            "emitter": cc.emitter,
            "acceptor": cc.acceptor,
            "time_fraction": cc.time_fraction,
            "landing_fraction": cc.landing_fraction,
        }
        for cc in scenario.close_contacts
    ]
    if scenario.deposition_rate_constant:
        doc["deposition_rate_constant"] = scenario.deposition_rate_constant
    doc["event_mode"] = scenario.event_mode
    doc["event_smoothing_epsilon"] = scenario.event_smoothing_epsilon
    return doc


def serialize_scenario(scenario: Scenario) -> str:
    """YAML text such that parse_scenario(serialize_scenario(s)) == s."""
    return yaml.safe_dump(scenario_to_document(scenario), sort_keys=False, default_flow_style=False)


def scenario_digest(scenario: Scenario) -> str:
    """Stable content hash of a scenario, for provenance in outputs."""
    return hashlib.sha256(serialize_scenario(scenario).encode("utf-8")).hexdigest()[:16]


def builtin_fixture(name: str, **kwargs) -> Scenario:
    """Construct one of the bundled case-study scenarios by name."""
    from tripath import fixtures

    return fixtures.builtin_fixture(name, **kwargs)


__all__ = [
    "AIR_REF",
    "CleaningPolicy",
    "CloseContactSpec",
    "ContactSpec",
    "DEFAULT_MATERIAL_HALF_LIVES",
    "Individual",
    "Material",
    "Scenario",
    "ScenarioWarning",
    "Setting",
    "Surface",
    "builtin_fixture",
    "hand_ref",
    "load_scenario",
    "mucosa_ref",
    "parse_document",
    "parse_scenario",
    "ref_owner",
    "scenario_digest",
    "scenario_to_document",
    "serialize_scenario",
    "validate",
]
