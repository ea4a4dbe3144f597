"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, ResourceCapError -> 2.
Property failures (audit, variational check) are reported as exit code 3
without raising.
"""


class RdsEntropyError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(RdsEntropyError, ValueError):
    """An input or configuration value violates a documented constraint."""


class ResourceCapError(RdsEntropyError, RuntimeError):
    """A computation would exceed a declared resource cap."""


class CocycleDomainError(RdsEntropyError, ValueError):
    """A group element lies outside the declared domain of a cocycle."""
