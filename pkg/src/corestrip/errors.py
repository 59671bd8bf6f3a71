"""Semantic exceptions shared across the package.

CLI exit-code mapping: DomainError/SchemaError -> 2, SaturationError -> 3.
"""


class CoreStripError(Exception):
    pass


class DomainError(CoreStripError, ValueError):
    """Inputs outside an operation's domain (bad parameters, infeasible state)."""


class SchemaError(CoreStripError, ValueError):
    """Malformed input file, CSV schema mismatch, or bad experiment spec."""


class SaturationError(CoreStripError, RuntimeError):
    """A rejection/restart budget was exhausted before success."""
