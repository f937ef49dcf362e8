"""Two-dimensional parameter sweeps over independent scenario runs.

A sweep takes two override paths (see :mod:`tripath.overrides`), a list
of values for each, and a scalar metric; every grid cell is one full
simulation of the scenario with both overrides applied, so each cell is
bit-identical to the equivalent standalone run.  Cells are independent
and can be dispatched to a process pool.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np
import yaml

from tripath.dynamics import DOSE_PATHWAYS
from tripath.errors import SchemaError
from tripath.exposure import infection_risk, pathway_shares
from tripath.integrator import IntegrationConfig, SimulationResult, integrate
from tripath.overrides import apply_overrides
from tripath.scenario import Scenario

METRICS = ("final_total_exposure", "final_risk", "pathway_share")


@dataclass(frozen=True)
class SweepAxis:
    path: str  #: override path
    values: tuple  #: numeric values, in output order


@dataclass(frozen=True)
class SweepSpec:
    """What to vary and what to measure.

    Without a target ``individual``, the exposure metric sums over all
    susceptibles while risk and share metrics average over them.
    """

    axis1: SweepAxis
    axis2: SweepAxis
    metric: str = "final_total_exposure"
    individual: str | None = None
    pathway: str = "fomite"  #: for the pathway_share metric


@dataclass(frozen=True, eq=False)
class SweepResult:
    spec: SweepSpec
    values: np.ndarray  #: shape (len(axis1.values), len(axis2.values))

    def rows(self) -> Iterator[tuple]:
        """(axis1 value, axis2 value, metric) in stable row-major order."""
        for i, v1 in enumerate(self.spec.axis1.values):
            for j, v2 in enumerate(self.spec.axis2.values):
                yield v1, v2, float(self.values[i, j])


def _axis_from_node(node, name: str) -> SweepAxis:
    if not isinstance(node, dict):
        raise SchemaError(f"{name}: expected a mapping with path and values")
    path = node.get("path")
    values = node.get("values")
    if not isinstance(path, str):
        raise SchemaError(f"{name}.path: expected an override path string")
    if not isinstance(values, list) or not values:
        raise SchemaError(f"{name}.values: expected a nonempty list")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise SchemaError(f"{name}.values: {v!r} is not a finite number")
    extra = set(node) - {"path", "values"}
    if extra:
        raise SchemaError(f"{name}: unknown field(s) {sorted(extra)}")
    return SweepAxis(path=path, values=tuple(values))


def parse_sweep_spec(text: str) -> SweepSpec:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(f"sweep spec is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("sweep spec must be a mapping")
    known = {"axis1", "axis2", "metric", "individual", "pathway"}
    extra = set(doc) - known
    if extra:
        raise SchemaError(f"sweep spec: unknown field(s) {sorted(extra)}")
    if "axis1" not in doc or "axis2" not in doc:
        raise SchemaError("sweep spec needs axis1 and axis2")
    spec = SweepSpec(
        axis1=_axis_from_node(doc["axis1"], "axis1"),
        axis2=_axis_from_node(doc["axis2"], "axis2"),
        metric=doc.get("metric", "final_total_exposure"),
        individual=doc.get("individual"),
        pathway=doc.get("pathway", "fomite"),
    )
    if spec.metric not in METRICS:
        raise SchemaError(f"metric must be one of {', '.join(METRICS)}, got {spec.metric!r}")
    if spec.pathway not in DOSE_PATHWAYS:
        raise SchemaError(f"pathway must be one of {', '.join(DOSE_PATHWAYS)}, got {spec.pathway!r}")
    if spec.individual is not None and not isinstance(spec.individual, str):
        raise SchemaError("individual must be an id string")
    return spec


def load_sweep_spec(path) -> SweepSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_sweep_spec(fh.read())


def evaluate_metric(result: SimulationResult, metric: str, individual: str | None,
                    pathway: str) -> float:
    susceptibles = result.layout.susceptible_ids
    if individual is not None:
        if individual not in susceptibles:
            raise SchemaError(f"{individual!r} is not a susceptible individual in this scenario")
        targets = (individual,)
    else:
        if not susceptibles:
            raise SchemaError("scenario has no susceptible individuals to measure")
        targets = susceptibles

    if metric == "final_total_exposure":
        return float(sum(result.total_dose(pid)[-1] for pid in targets))
    if metric == "final_risk":
        risks = [
            infection_risk(float(result.total_dose(pid)[-1]),
                           result.scenario.individual(pid).dose_response)
            for pid in targets
        ]
        return float(np.mean(risks))
    if metric == "pathway_share":
        index = DOSE_PATHWAYS.index(pathway)
        shares = []
        for pid in targets:
            share = pathway_shares(result, pid)
            shares.append(math.nan if share is None else share[index])
        return float(np.mean(shares))
    raise SchemaError(f"unknown metric {metric!r}")


def _run_cell(task) -> float:
    scenario, assignments, config, metric, individual, pathway = task
    cell = apply_overrides(scenario, assignments)
    result = integrate(cell, config)
    return evaluate_metric(result, metric, individual, pathway)


def run_sweep(
    scenario: Scenario,
    spec: SweepSpec,
    config: IntegrationConfig | None = None,
    jobs: int | None = None,
) -> SweepResult:
    """Run every grid cell; with jobs > 1, in a process pool."""
    config = IntegrationConfig() if config is None else config
    tasks = [
        (scenario, ((spec.axis1.path, v1), (spec.axis2.path, v2)),
         config, spec.metric, spec.individual, spec.pathway)
        for v1 in spec.axis1.values
        for v2 in spec.axis2.values
    ]
    if jobs is not None and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(_run_cell, tasks))
    else:
        values = [_run_cell(task) for task in tasks]
    grid = np.array(values, dtype=float).reshape(len(spec.axis1.values), len(spec.axis2.values))
    return SweepResult(spec=spec, values=grid)


__all__ = [
    "METRICS",
    "SweepAxis",
    "SweepResult",
    "SweepSpec",
    "evaluate_metric",
    "load_sweep_spec",
    "parse_sweep_spec",
    "run_sweep",
]
