"""Post-processing of simulation results.

Pathway-resolved exposures, infection risk, relative pathway
contributions over time, the mass-balance audit, and the structured
run summary written by the command line.

The canonical risk number uses the accumulated influx doses (fomite +
aerosol + close contact); the risk implied by the mucosa load itself is
reported alongside for comparison, since absorbed load also decays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tripath.dynamics import DOSE_PATHWAYS
from tripath.errors import ContractError
from tripath.integrator import SimulationResult, steady_state_air
from tripath.scenario import hand_ref, mucosa_ref

#: Ledger fields that are sources into the tracked compartments.
SOURCE_FIELDS = ("shed_aerosol", "shed_ld", "shed_contact")
#: Ledger fields that are sinks out of them.
SINK_FIELDS = (
    "inactivated",
    "vented",
    "cleaned",
    "inhaled_infected",
    "inhaled_susceptible",
    "absorbed_infected_mucosa",
)


def infection_risk(dose: float, dose_response: float) -> float:
    """Exponential dose-response probability, 1 - exp(-dose / dose_response).

    Raises:
        ContractError: nonpositive dose_response.
    """
    if dose_response <= 0:
        raise ContractError("dose_response must be > 0")
    return 1.0 - math.exp(-dose / dose_response)


def pathway_shares(result: SimulationResult, individual_id: str, t: float | None = None):
    """Fractions (fomite, aerosol, close_contact) of the dose at time t.

    Defaults to the end of the run.  Returns None while the total dose
    is zero, where shares are undefined.
    """
    if t is None:
        t = float(result.times[-1])
    doses = [
        float(np.interp(t, result.times, result.dose(individual_id, pathway)))
        for pathway in DOSE_PATHWAYS
    ]
    total = sum(doses)
    if total <= 0.0:
        return None
    return tuple(d / total for d in doses)


@dataclass(frozen=True)
class MassBalanceReport:
    """Conservation audit: initial content plus sources vs. content plus sinks.

    Tracked content covers surfaces, hands, susceptible mucosae and the
    air; frozen infected mucosae sit outside the boundary, so their
    hand exchange appears under sources (``shed_contact``) and sinks
    (``absorbed_infected_mucosa``).  The identity is exact for the
    continuous model when settling and resuspension are zero.
    """

    initial_content: float
    final_content: float
    sources: dict[str, float]
    sinks: dict[str, float]
    total_shed: float
    residual: float
    relative_residual: float


def tracked_content(result: SimulationResult, state: np.ndarray) -> float:
    """Total load inside the audited boundary for one state vector."""
    layout = result.layout
    rows = [layout.surface_index[s] for s in layout.surface_ids]
    rows += [layout.hand_index[p] for p in layout.individual_ids]
    rows += [layout.mucosa_index[p] for p in layout.susceptible_ids]
    rows.append(layout.air)
    return float(state[rows].sum())


def mass_balance_report(result: SimulationResult) -> MassBalanceReport:
    sources = {name: result.ledger_final(name) for name in SOURCE_FIELDS}
    sinks = {name: result.ledger_final(name) for name in SINK_FIELDS}
    initial = tracked_content(result, result.initial_state)
    final = tracked_content(result, result.states[-1])
    total_shed = sum(sources.values())
    residual = initial + total_shed - final - sum(sinks.values())
    scale = total_shed if total_shed > 0 else (initial if initial > 0 else 1.0)
    return MassBalanceReport(
        initial_content=initial,
        final_content=final,
        sources=sources,
        sinks=sinks,
        total_shed=total_shed,
        residual=residual,
        relative_residual=abs(residual) / scale,
    )


def build_summary(result: SimulationResult) -> dict:
    """Plain-data summary of one run, stable across repeats of the same input."""
    scenario = result.scenario
    t_end = float(result.times[-1])
    balance = mass_balance_report(result)

    individuals = {}
    for person in scenario.individuals:
        entry: dict = {
            "infected": person.infected,
            "final_hand_load": float(result.series(hand_ref(person.id))[-1]),
            "final_mucosa_load": float(result.series(mucosa_ref(person.id))[-1]),
        }
        if not person.infected:
            doses = {
                pathway: float(result.dose(person.id, pathway)[-1])
                for pathway in DOSE_PATHWAYS
            }
            total = sum(doses.values())
            shares = pathway_shares(result, person.id)
            entry.update(
                {
                    "dose_fomite": doses["fomite"],
                    "dose_aerosol": doses["aerosol"],
                    "dose_close_contact": doses["close_contact"],
                    "dose_total": total,
                    "risk": infection_risk(total, person.dose_response),
                    "risk_from_mucosa_load": infection_risk(
                        entry["final_mucosa_load"], person.dose_response
                    ),
                    "pathway_shares": None
                    if shares is None
                    else {name: share for name, share in zip(DOSE_PATHWAYS, shares)},
                }
            )
        individuals[person.id] = entry

    return {
        "run": {
            "scenario_digest": result.digest,
            "mode": result.mode,
            "epsilon": result.epsilon,
            "t_end": t_end,
            "grid_step": result.config.grid_step,
            "rtol": result.config.rtol,
            "atol": result.config.atol,
            "method": result.config.method,
        },
        "air": {
            "final_load": float(result.series("air")[-1]),
            "steady_state_estimate": float(steady_state_air(scenario)),
        },
        "surfaces": {
            f.id: {
                "final_load": float(result.series(f.id)[-1]),
                "final_concentration": float(result.surface_concentration(f.id)[-1]),
            }
            for f in scenario.surfaces
        },
        "individuals": individuals,
        "mass_balance": {
            "initial_content": balance.initial_content,
            "final_content": balance.final_content,
            "sources": balance.sources,
            "sinks": balance.sinks,
            "total_shed": balance.total_shed,
            "residual": balance.residual,
            "relative_residual": balance.relative_residual,
        },
        "events": [
            {
                "time": e.time,
                "kind": e.kind,
                "target": e.target,
                "load_before": e.load_before,
                "load_after": e.load_after,
            }
            for e in result.events
        ],
    }


__all__ = [
    "MassBalanceReport",
    "SINK_FIELDS",
    "SOURCE_FIELDS",
    "SimulationResult",
    "build_summary",
    "infection_risk",
    "mass_balance_report",
    "pathway_shares",
    "tracked_content",
]
