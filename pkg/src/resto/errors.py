"""Error types shared across the engine, planner and service layers.

Each error carries a machine-readable ``code`` and, where it applies, the
``path`` of the offending field so API clients can pinpoint bad input.
"""


class RestoError(Exception):
    code = "error"

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message)
        self.message = message
        self.path = path

    def as_dict(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.path is not None:
            out["path"] = self.path
        return out


class SchemaError(RestoError):
    """Input document violates a schema or a validation invariant."""

    code = "schema_violation"


class InfeasibleError(RestoError):
    """Action or observation is not applicable in the current state."""

    code = "infeasible"


class StateLimitError(RestoError):
    """State-space construction exceeded the configured cap."""

    code = "state_limit_exceeded"


class UnknownBusError(RestoError):
    code = "unknown_bus"


class UnsolvableError(RestoError):
    """A non-goal state has no applicable action under the given goal set."""

    code = "unreachable_goal"
