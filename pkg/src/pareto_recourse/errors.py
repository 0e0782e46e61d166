"""Exception types shared across the package."""


class RecourseError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(RecourseError, ValueError):
    """An operation was called with arguments that violate its preconditions."""


class SchemaError(RecourseError, ValueError):
    """A schema, cost-spec, or classifier configuration is invalid."""


class DataError(RecourseError, ValueError):
    """A dataset file or its contents cannot be used (bad rows, bad stats)."""
