"""Exception hierarchy shared by all csgp modules.

The CLI maps these onto process exit codes: ConfigError (and its
subclasses) and InvalidStructureError exit 2, ResourceLimitError exits 3,
InfeasibleError exits 4.
"""


class CsgError(Exception):
    """Base class for all errors raised by csgp."""


class ConfigError(CsgError):
    """Invalid argument, parameter, range, or dimension."""


class ParseError(ConfigError):
    """Malformed input file; message carries line context."""


class SchemaError(ConfigError):
    """Structurally valid file whose content violates the documented schema."""


class InvalidStructureError(CsgError):
    """A coalition structure that is not a partition of the agent set."""


class ResourceLimitError(CsgError):
    """Problem size exceeds a documented solver or simulator guard."""


class InfeasibleError(CsgError):
    """No feasible coalition structure remains after exclusions."""
