"""Exception hierarchy shared across the package."""


class ModelError(Exception):
    """Base class for all tripath errors."""


class SchemaError(ModelError):
    """A scenario document is structurally malformed (missing or mistyped field)."""


class ScenarioValidationError(ModelError):
    """A well-formed scenario violates a model invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("scenario failed validation:\n" + "\n".join(f"  - {v}" for v in self.violations))


class ContractError(ModelError):
    """An operation was called outside its contract (e.g. unknown transfer pair)."""


class IntegrationError(ModelError):
    """The integrator could not produce a trustworthy solution."""
