"""Exception types shared across the simulator."""


class GstrError(Exception):
    """Base class for all simulator errors."""


class ParameterError(GstrError, ValueError):
    """A numeric or enumerated parameter is outside its valid range."""


class UnknownNodeError(GstrError, KeyError):
    """A node id is not part of the social graph."""

    def __str__(self):
        return f"unknown node: {self.args[0]!r}"


class NoCandidateError(GstrError, LookupError):
    """Selection over an empty candidate set."""


class OrderingError(GstrError, ValueError):
    """Timestamps went backwards where they must be monotone."""


class DegenerateRatioError(GstrError, ZeroDivisionError):
    """Closeness ratio requested with the candidate sitting on the receiver."""


class MessageExpired(GstrError):
    """A message outlived its TTL while still in custody."""

    def __init__(self, msg_id, now):
        super().__init__(f"message {msg_id} expired at t={now:.3f}")
        self.msg_id = msg_id
        self.now = now


class ConfigError(GstrError, ValueError):
    """Configuration file or override is invalid."""

    def __init__(self, message, line=None, text=None):
        where = f" (line {line}: {text.strip()!r})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line


class ScenarioError(GstrError):
    """A case scenario cannot be constructed for the requested parameters."""
