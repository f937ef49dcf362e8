"""Right-hand side assembly for the coupled transmission ODE system.

The model is linear in the state: between discrete events it reads
``dy/dt = A(eta) y + b(eta)`` where ``eta`` is the vector of presence
indicators.  ``A`` is affine in ``eta`` and ``b`` collects constant
sources, some gated by one indicator (droplets onto surfaces), some by
a product of two (droplets onto another person's hands or mucosa).
:class:`TransmissionModel` precomputes the ungated part plus one sparse
increment per individual, so the operator for any presence pattern is
assembled cheaply and exactly.

The state vector is laid out as::

    [ surfaces | hands | mucosae | air | doses (3 per susceptible) | ledger ]

Dose accumulators integrate the pathway-resolved mucosa influx of each
susceptible alongside the loads, so their accuracy tracks the solver's
error control rather than any output grid.  The ledger block feeds the
mass-balance audit: every source into and sink out of the tracked
compartments is integrated separately.  Infected mucosae are frozen at
their initial load, so their exchange with the owner's hands enters the
ledger as an external source (mucosa to hand) and sink (hand to
mucosa).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from tripath.errors import ModelError
from tripath.kernels import (
    LN10,
    RateContext,
    aerosol_emission_rate,
    build_rate_context,
    ld_deposition_rate,
)
from tripath.scenario import AIR_REF, HAND_PREFIX, Scenario, hand_ref, mucosa_ref, ref_owner

#: Dose pathways per susceptible, in state-vector order.
DOSE_PATHWAYS = ("fomite", "aerosol", "close_contact")

#: Ledger accumulators, in state-vector order.  Sources first, then sinks.
LEDGER_FIELDS = (
    "shed_aerosol",
    "shed_ld",
    "shed_contact",
    "inactivated",
    "vented",
    "cleaned",
    "inhaled_infected",
    "inhaled_susceptible",
    "absorbed_infected_mucosa",
)


# ---------------------------------------------------------------------------
# presence indicators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndicatorSpec:
    """Presence window of one individual, sharp or smoothed."""

    entry_time: float
    duration: float
    epsilon: float = 1e-3
    mode: str = "sharp"  #: "sharp" | "smoothed"


def _ramp(x: float, epsilon: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= epsilon:
        return 1.0
    return x / epsilon


def indicator(spec: IndicatorSpec, t: float) -> float:
    """Presence value in [0, 1] at time t.

    Sharp mode is the exact 0/1 window.  Smoothed mode is a trapezoid:
    a linear ramp up over [entry, entry + epsilon] and down over
    [exit, exit + epsilon], which keeps the nominal window fully inside
    the support.
    """
    t_out = spec.entry_time + spec.duration
    if spec.mode == "sharp":
        return 1.0 if spec.entry_time <= t <= t_out else 0.0
    return _ramp(t - spec.entry_time, spec.epsilon) * _ramp(t_out + spec.epsilon - t, spec.epsilon)


def smoothed_delta(t: float, center: float, epsilon: float) -> float:
    """Triangular unit-mass pulse: height 1/epsilon, support center +- epsilon."""
    return max(0.0, 1.0 - abs(t - center) / epsilon) / epsilon


# ---------------------------------------------------------------------------
# state layout
# ---------------------------------------------------------------------------

class StateLayout:
    """Index bookkeeping for the flat state vector of one scenario."""

    def __init__(self, scenario: Scenario):
        self.surface_ids = tuple(f.id for f in scenario.surfaces)
        self.individual_ids = tuple(p.id for p in scenario.individuals)
        self.susceptible_ids = tuple(p.id for p in scenario.individuals if not p.infected)
        n_s, n_p = len(self.surface_ids), len(self.individual_ids)
        self.surface_index = {sid: i for i, sid in enumerate(self.surface_ids)}
        self.hand_index = {pid: n_s + j for j, pid in enumerate(self.individual_ids)}
        self.mucosa_index = {pid: n_s + n_p + j for j, pid in enumerate(self.individual_ids)}
        self.air = n_s + 2 * n_p
        self._dose0 = self.air + 1
        self.dose_index = {
            (pid, pathway): self._dose0 + 3 * q + w
            for q, pid in enumerate(self.susceptible_ids)
            for w, pathway in enumerate(DOSE_PATHWAYS)
        }
        self._ledger0 = self._dose0 + 3 * len(self.susceptible_ids)
        self.ledger_index = {name: self._ledger0 + i for i, name in enumerate(LEDGER_FIELDS)}
        self.size = self._ledger0 + len(LEDGER_FIELDS)

    def index_of(self, ref: str) -> int:
        """State index of a compartment reference ('air' included)."""
        if ref == AIR_REF:
            return self.air
        owner = ref_owner(ref)
        if owner is None:
            return self.surface_index[ref]
        table = self.hand_index if ref.startswith(HAND_PREFIX) else self.mucosa_index
        return table[owner]

    def state_labels(self) -> list[str]:
        labels = list(self.surface_ids)
        labels += [hand_ref(pid) for pid in self.individual_ids]
        labels += [mucosa_ref(pid) for pid in self.individual_ids]
        labels.append(AIR_REF)
        for pid in self.susceptible_ids:
            labels += [f"dose_{pathway}:{pid}" for pathway in DOSE_PATHWAYS]
        labels += list(LEDGER_FIELDS)
        return labels


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

class TransmissionModel:
    """Assembled dynamics of one scenario.

    The instance is immutable apart from an internal operator cache and
    may be shared across sequential integrations of the same scenario.
    """

    def __init__(self, scenario: Scenario, ctx: RateContext | None = None):
        self.scenario = scenario
        self.ctx = build_rate_context(scenario) if ctx is None else ctx
        self.layout = StateLayout(scenario)
        self._op_cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
        self._assemble()

    # -- static assembly --------------------------------------------------

    def _assemble(self) -> None:
        sc, ctx, L = self.scenario, self.ctx, self.layout
        v = sc.setting.air_volume
        air = L.air
        led = L.ledger_index

        A0 = np.zeros((L.size, L.size))
        person_A: dict[str, list[tuple[int, int, float]]] = {p.id: [] for p in sc.individuals}
        person_b: dict[str, list[tuple[int, float]]] = {p.id: [] for p in sc.individuals}
        pair_b: dict[tuple[str, str], list[tuple[int, float]]] = {}

        for f in sc.surfaces:
            i = L.surface_index[f.id]
            k = ctx.inactivation[f.id]
            A0[i, i] -= k
            A0[led["inactivated"], i] += k
            if f.resuspension_rate:
                A0[i, i] -= f.resuspension_rate
                A0[air, i] += f.resuspension_rate
            if f.cleaning is not None and f.cleaning.mode == "continuous":
                c = f.cleaning.lrv * LN10 * f.cleaning.frequency
                A0[i, i] -= c
                A0[led["cleaned"], i] += c
            settle = ctx.deposition_rate_constant * f.area / v
            if settle:
                A0[i, air] += settle
                A0[air, air] -= settle

        k_air = ctx.inactivation[AIR_REF]
        A0[air, air] -= k_air
        A0[led["inactivated"], air] += k_air
        exchange = sc.setting.ventilation_flow / v
        A0[air, air] -= exchange
        A0[led["vented"], air] += exchange

        for p in sc.individuals:
            pid = p.id
            h, m = L.hand_index[pid], L.mucosa_index[pid]
            entries = person_A[pid]
            sources = person_b[pid]

            # the air column loses settling onto every individual's hands
            # unconditionally, while the (gated) hand gain below applies
            # only during presence; with the default zero settling both
            # vanish and mass balance closes exactly
            settle_h = ctx.deposition_rate_constant * p.hand_area / v
            if settle_h:
                A0[air, air] -= settle_h
                entries.append((h, air, settle_h))

            k_h = ctx.inactivation[hand_ref(pid)]
            entries += [(h, h, -k_h), (led["inactivated"], h, k_h)]
            if p.hand_wash is not None and p.hand_wash.mode == "continuous":
                c = p.hand_wash.lrv * LN10 * p.hand_wash.frequency
                entries += [(h, h, -c), (led["cleaned"], h, c)]

            for f in sc.surfaces:
                to_hand = ctx.transfer.get((f.id, hand_ref(pid)))
                if to_hand is None:
                    continue
                to_surface = ctx.transfer[(hand_ref(pid), f.id)]
                i = L.surface_index[f.id]
                entries += [
                    (h, i, to_hand), (i, i, -to_hand),
                    (i, h, to_surface), (h, h, -to_surface),
                ]

            c_h2m = ctx.transfer[(hand_ref(pid), mucosa_ref(pid))]
            c_m2h = ctx.transfer[(mucosa_ref(pid), hand_ref(pid))]
            entries += [(h, m, c_m2h), (h, h, -c_h2m)]
            pv = p.respiration_rate / v

            if p.infected:
                # mucosa frozen: exchange with the hands crosses the
                # system boundary, and inhaled air is simply lost
                entries += [
                    (led["shed_contact"], m, c_m2h),
                    (led["absorbed_infected_mucosa"], h, c_h2m),
                    (air, air, -pv),
                    (led["inhaled_infected"], air, pv),
                ]
            else:
                k_m = ctx.inactivation[mucosa_ref(pid)]
                entries += [
                    (m, h, c_h2m),
                    (m, m, -(c_m2h + k_m)),
                    (led["inactivated"], m, k_m),
                    # inhaled aerosol is absorbed dose, not a deposit on
                    # the touchable mucosa pool; letting it ride back out
                    # through face touches would relabel aerosol dose as
                    # fomite exposure for people who never touched
                    # anything contaminated
                    (air, air, -pv),
                    (led["inhaled_susceptible"], air, pv),
                    (L.dose_index[(pid, "fomite")], h, c_h2m),
                    (L.dose_index[(pid, "aerosol")], air, pv),
                ]
            # the mucosa equation also subtracts the shedding rate inside
            # its gate; it is identically zero (susceptibles shed nothing,
            # infected mucosae are frozen) and is omitted

            emission = aerosol_emission_rate(p)
            if emission:
                sources += [(air, emission), (led["shed_aerosol"], emission)]

        for cc in sc.close_contacts:
            emitter = sc.individual(cc.emitter)
            g = ld_deposition_rate(ctx, emitter, cc.acceptor)
            if g == 0.0:
                continue
            owner = ref_owner(cc.acceptor)
            if owner is None:
                person_b[cc.emitter] += [
                    (L.surface_index[cc.acceptor], g),
                    (L.ledger_index["shed_ld"], g),
                ]
            elif cc.acceptor.startswith(HAND_PREFIX):
                rows = pair_b.setdefault((owner, cc.emitter), [])
                rows += [(L.hand_index[owner], g), (L.ledger_index["shed_ld"], g)]
            else:
                target = sc.individual(owner)
                if target.infected or owner == cc.emitter:
                    continue  # frozen mucosa, or no droplet route to one's own
                rows = pair_b.setdefault((owner, cc.emitter), [])
                rows += [
                    (L.mucosa_index[owner], g),
                    (L.dose_index[(owner, "close_contact")], g),
                    (L.ledger_index["shed_ld"], g),
                ]

        def pack_A(triples):
            rows = np.array([r for r, _, _ in triples], dtype=np.intp)
            cols = np.array([c for _, c, _ in triples], dtype=np.intp)
            vals = np.array([x for _, _, x in triples], dtype=float)
            return rows, cols, vals

        def pack_b(pairs):
            rows = np.array([r for r, _ in pairs], dtype=np.intp)
            vals = np.array([x for _, x in pairs], dtype=float)
            return rows, vals

        self._A0 = A0
        self._person_A = {pid: pack_A(t) for pid, t in person_A.items()}
        self._person_b = {pid: pack_b(s) for pid, s in person_b.items()}
        self._pair_b = {key: pack_b(s) for key, s in pair_b.items()}
        self._person_pos = {pid: j for j, pid in enumerate(L.individual_ids)}
        self._pulses = self._collect_pulses()

    def _collect_pulses(self) -> list[tuple[int, float, float]]:
        """(state row, lrv, time) for every discrete cleaning application."""
        sc, L = self.scenario, self.layout
        pulses = []
        for f in sc.surfaces:
            if f.cleaning is not None and f.cleaning.mode == "discrete":
                pulses += [(L.surface_index[f.id], f.cleaning.lrv, t) for t in f.cleaning.event_times]
        for p in sc.individuals:
            if p.hand_wash is not None and p.hand_wash.mode == "discrete":
                pulses += [(L.hand_index[p.id], p.hand_wash.lrv, t) for t in p.hand_wash.event_times]
        return pulses

    # -- operators ---------------------------------------------------------

    def operator(self, presence: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Instantaneous (A, b) for a presence vector over individuals.

        Presence entries may be fractional (smoothed mode); droplet
        deposition onto people is weighted by the product of the target
        owner's and the emitter's presence.
        """
        A = self._A0.copy()
        b = np.zeros(self.layout.size)
        for pid, j in self._person_pos.items():
            w = presence[j]
            if w == 0.0:
                continue
            rows, cols, vals = self._person_A[pid]
            np.add.at(A, (rows, cols), w * vals)
            rows, vals = self._person_b[pid]
            np.add.at(b, rows, w * vals)
        for (owner, emitter), (rows, vals) in self._pair_b.items():
            w = presence[self._person_pos[owner]] * presence[self._person_pos[emitter]]
            if w != 0.0:
                np.add.at(b, rows, w * vals)
        return A, b

    def operator_for_pattern(self, pattern: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
        """Cached (A, b) for a 0/1 presence pattern (exact-jump segments)."""
        cached = self._op_cache.get(pattern)
        if cached is None:
            cached = self.operator(np.asarray(pattern, dtype=float))
            self._op_cache[pattern] = cached
        return cached

    def indicator_specs(self, mode: str, epsilon: float) -> tuple[IndicatorSpec, ...]:
        return tuple(
            IndicatorSpec(p.entry_time, p.duration, epsilon, mode)
            for p in self.scenario.individuals
        )

    def rhs_sharp(self, t: float, y: np.ndarray) -> np.ndarray:
        """Derivative with exact 0/1 indicators (no event pulses)."""
        if y.shape != (self.layout.size,):
            raise ModelError(f"state has {y.shape} entries, layout needs {self.layout.size}")
        eta = np.array([
            indicator(IndicatorSpec(p.entry_time, p.duration), t)
            for p in self.scenario.individuals
        ])
        A, b = self.operator(eta)
        return A @ y + b

    def rhs_smoothed(self, t: float, y: np.ndarray, epsilon: float) -> np.ndarray:
        """Derivative with trapezoidal indicators and triangular cleaning pulses."""
        if y.shape != (self.layout.size,):
            raise ModelError(f"state has {y.shape} entries, layout needs {self.layout.size}")
        eta = np.array([
            indicator(IndicatorSpec(p.entry_time, p.duration, epsilon, "smoothed"), t)
            for p in self.scenario.individuals
        ])
        A, b = self.operator(eta)
        dy = A @ y + b
        cleaned = self.layout.ledger_index["cleaned"]
        for row, lrv, center in self._pulses:
            pulse = smoothed_delta(t, center, epsilon)
            if pulse:
                # pulse strength lrv*ln(10) integrates to the exact
                # 10^(-lrv) survival of the discrete jump
                rate = lrv * LN10 * pulse * y[row]
                dy[row] -= rate
                dy[cleaned] += rate
        return dy

    # -- initial conditions -------------------------------------------------

    def initial_state(self) -> np.ndarray:
        """Uncontaminated setting, except seeded infected individuals.

        Infected hands start at the equilibrium between gains from their
        own mucosa (touching plus droplet self-deposition) and losses to
        the mucosa and inactivation.
        """
        sc, ctx, L = self.scenario, self.ctx, self.layout
        y = np.zeros(L.size)
        for f in sc.surfaces:
            y[L.surface_index[f.id]] = f.initial_load
        for p in sc.individuals:
            if not p.infected:
                continue
            y[L.mucosa_index[p.id]] = p.initial_mucosa_load
            c_m2h = ctx.transfer[(mucosa_ref(p.id), hand_ref(p.id))]
            c_h2m = ctx.transfer[(hand_ref(p.id), mucosa_ref(p.id))]
            k_h = ctx.inactivation[hand_ref(p.id)]
            gain = c_m2h * p.initial_mucosa_load + ld_deposition_rate(ctx, p, hand_ref(p.id))
            y[L.hand_index[p.id]] = gain / (c_h2m + k_h)
        return y


@lru_cache(maxsize=16)
def model_for(scenario: Scenario) -> TransmissionModel:
    """Shared assembled model per scenario (scenarios are hashable)."""
    return TransmissionModel(scenario)


def rhs(scenario: Scenario, state: np.ndarray, t: float, smoothed: bool = False) -> np.ndarray:
    """Convenience one-shot derivative evaluation."""
    model = model_for(scenario)
    if smoothed:
        return model.rhs_smoothed(t, state, scenario.event_smoothing_epsilon)
    return model.rhs_sharp(t, state)


__all__ = [
    "DOSE_PATHWAYS",
    "LEDGER_FIELDS",
    "IndicatorSpec",
    "StateLayout",
    "TransmissionModel",
    "indicator",
    "model_for",
    "rhs",
    "smoothed_delta",
]
