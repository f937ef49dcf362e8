"""Dotted-path scenario overrides (the CLI's ``--set`` and the sweep axes).

An override addresses one value in the scenario document and yields a
new validated scenario; the original is never mutated.  Paths mirror
the document structure::

    setting.ventilation_flow          surfaces.<id>.area
    individuals.<id>.duration         surfaces.<id>.cleaning.lrv
    contacts.<donor>.<acceptor>.frequency
    close_contacts.<emitter>.<acceptor>.landing_fraction
    deposition_rate_constant          event_mode

plus a few aliases for the quantities most often swept:

* ``cleaning.count`` - replace every discrete cleaning/wash schedule by
  N applications spread evenly over the co-presence window, ending at
  its close (N = 1 puts the single application at the window's end).
* ``ventilation.ach`` / ``ventilation.flow`` - room air exchange, in
  air changes per hour or m^3/h.
* ``mask.efficacy`` - large-droplet capture at the source, everyone.
* ``close_contact.time_fraction`` - time fraction of every
  person-to-person close-contact route (surface routes untouched).
"""

from __future__ import annotations

from typing import Any, Iterable

import yaml

from tripath.errors import SchemaError
from tripath.scenario import (
    HAND_PREFIX,
    MUCOSA_PREFIX,
    Scenario,
    parse_document,
    ref_owner,
    scenario_to_document,
)


def parse_assignment(text: str) -> tuple[str, Any]:
    """Split a ``path=value`` argument; the value is read as YAML scalar."""
    path, sep, raw = text.partition("=")
    if not sep or not path.strip():
        raise SchemaError(f"override {text!r} must have the form path=value")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        value = raw
    return path.strip(), value


def apply_overrides(scenario: Scenario, assignments: Iterable[tuple[str, Any]]) -> Scenario:
    """Apply assignments in order and return the re-validated scenario."""
    doc = scenario_to_document(scenario)
    for path, value in assignments:
        _apply(doc, path, value)
    return parse_document(doc)


def apply_override(scenario: Scenario, path: str, value: Any) -> Scenario:
    return apply_overrides(scenario, [(path, value)])


# ---------------------------------------------------------------------------
# internals
# ---------------------------------------------------------------------------

def _find(items: list[dict], key: str, wanted: str, where: str) -> dict:
    for node in items:
        if node.get(key) == wanted:
            return node
    known = ", ".join(repr(node.get(key)) for node in items)
    raise SchemaError(f"{where} {wanted!r} not found (have: {known})")


def _set_leaf(node: dict, parts: list[str], value: Any, where: str) -> None:
    for key in parts[:-1]:
        child = node.get(key)
        if not isinstance(child, dict):
            raise SchemaError(f"{where}: no {key!r} section to override")
        node = child
        where = f"{where}.{key}"
    node[parts[-1]] = value


def _co_presence_window(doc: dict) -> tuple[float, float]:
    entries = [p["entry_time"] for p in doc["individuals"]]
    exits = [p["entry_time"] + p["duration"] for p in doc["individuals"]]
    return max(entries), min(exits)


def _set_cleaning_count(doc: dict, value: Any) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value) or value < 0:
        raise SchemaError(f"cleaning.count must be a nonnegative integer, got {value!r}")
    count = int(value)
    start, end = _co_presence_window(doc)
    if count and end <= start:
        raise SchemaError("cleaning.count needs a nonempty co-presence window to schedule into")
    times = [start + k * (end - start) / count for k in range(1, count + 1)]

    def reschedule(node: dict | None) -> None:
        if node is not None and node.get("mode", "discrete") == "discrete":
            node["event_times"] = list(times)

    for surface in doc.get("surfaces", []):
        reschedule(surface.get("cleaning"))
    for person in doc["individuals"]:
        reschedule(person.get("hand_wash"))


def _person_directed(node: dict) -> bool:
    acceptor = node["acceptor"]
    if not acceptor.startswith((HAND_PREFIX, MUCOSA_PREFIX)):
        return False
    return ref_owner(acceptor) != node["emitter"]


_ALIASES = {}


def _alias(path):
    def register(fn):
        _ALIASES[path] = fn
        return fn
    return register


@_alias("cleaning.count")
def _(doc, value):
    _set_cleaning_count(doc, value)


@_alias("ventilation.ach")
def _(doc, value):
    doc["setting"]["ventilation_flow"] = float(value) * doc["setting"]["air_volume"]


@_alias("ventilation.flow")
def _(doc, value):
    doc["setting"]["ventilation_flow"] = float(value)


@_alias("mask.efficacy")
def _(doc, value):
    for person in doc["individuals"]:
        person["mask_capture_efficacy"] = float(value)


@_alias("close_contact.time_fraction")
def _(doc, value):
    touched = False
    for node in doc.get("close_contacts", []):
        if _person_directed(node):
            node["time_fraction"] = float(value)
            touched = True
    if not touched:
        raise SchemaError("close_contact.time_fraction: scenario has no person-to-person close contacts")


def _apply(doc: dict, path: str, value: Any) -> None:
    alias = _ALIASES.get(path)
    if alias is not None:
        alias(doc, value)
        return

    parts = path.split(".")
    head = parts[0]
    if head == "setting" and len(parts) == 2:
        if parts[1] == "air_changes_per_hour":
            doc["setting"]["ventilation_flow"] = float(value) * doc["setting"]["air_volume"]
        else:
            doc["setting"][parts[1]] = value
    elif head in ("deposition_rate_constant", "event_mode", "event_smoothing_epsilon") and len(parts) == 1:
        doc[head] = value
    elif head in ("surfaces", "individuals") and len(parts) >= 3:
        node = _find(doc.get(head, []), "id", parts[1], head[:-1])
        _set_leaf(node, parts[2:], value, f"{head}.{parts[1]}")
    elif head == "contacts" and len(parts) == 4:
        node = next(
            (c for c in doc.get("contacts", [])
             if c["donor"] == parts[1] and c["acceptor"] == parts[2]),
            None,
        )
        if node is None:
            raise SchemaError(f"contact {parts[1]!r} -> {parts[2]!r} not found")
        node[parts[3]] = value
    elif head == "close_contacts" and len(parts) == 4:
        node = next(
            (c for c in doc.get("close_contacts", [])
             if c["emitter"] == parts[1] and c["acceptor"] == parts[2]),
            None,
        )
        if node is None:
            raise SchemaError(f"close contact {parts[1]!r} -> {parts[2]!r} not found")
        node[parts[3]] = value
    else:
        raise SchemaError(f"override path {path!r} does not resolve in the scenario schema")


__all__ = ["apply_override", "apply_overrides", "parse_assignment"]
