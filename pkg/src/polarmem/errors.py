"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A numeric object violates one of its invariants (row sums, ranges...)."""


class StructuralError(ValueError):
    """A Markov chain lacks required structure (reducible, periodic, unstable)."""


class UnsupportedModeError(ValueError):
    """Requested a noise/CSI combination with no known capacity result."""


class ConfigError(ValueError):
    """A model/config document failed validation."""


class ResourceError(RuntimeError):
    """A computation exceeds the configured resource budget."""
