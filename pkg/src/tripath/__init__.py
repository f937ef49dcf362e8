"""Indoor virus transmission simulator.

tripath models the build-up and decay of viral load in an enclosed
setting across three transmission pathways: fomite (surface touch
chains), close-contact large droplets, and well-mixed aerosol.  The
core model is a linear ODE system over surface, hand, mucosa and air
compartments, driven by entry/exit schedules and punctuated by
discrete disinfection events.
"""

from tripath.errors import (
    ContractError,
    IntegrationError,
    ModelError,
    ScenarioValidationError,
    SchemaError,
)
from tripath.scenario import (
    CleaningPolicy,
    CloseContactSpec,
    ContactSpec,
    Individual,
    Material,
    Scenario,
    Setting,
    Surface,
    builtin_fixture,
    load_scenario,
    parse_scenario,
    serialize_scenario,
    validate,
)
from tripath.kernels import RateContext, build_rate_context
from tripath.integrator import EventTimeline, IntegrationConfig, integrate, steady_state_air
from tripath.exposure import (
    SimulationResult,
    infection_risk,
    mass_balance_report,
    pathway_shares,
)

__version__ = "0.1.0"

__all__ = [
    "CleaningPolicy",
    "CloseContactSpec",
    "ContactSpec",
    "ContractError",
    "EventTimeline",
    "Individual",
    "IntegrationConfig",
    "IntegrationError",
    "Material",
    "ModelError",
    "RateContext",
    "Scenario",
    "ScenarioValidationError",
    "SchemaError",
    "Setting",
    "SimulationResult",
    "Surface",
    "build_rate_context",
    "builtin_fixture",
    "infection_risk",
    "integrate",
    "load_scenario",
    "mass_balance_report",
    "parse_scenario",
    "pathway_shares",
    "serialize_scenario",
    "steady_state_air",
    "validate",
]
