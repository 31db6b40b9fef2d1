"""Exception types shared across the package."""


class DomainError(ValueError):
    """A mean or parameter lies outside its admissible domain."""


class UnsupportedPartitionError(ValueError):
    """Bucket partition requested for an atomic reservoir."""


class PartialFormulaError(ValueError):
    """A bound formula is undefined for the given bucket count."""


class DegeneratePoolError(RuntimeError):
    """The queried pool has fewer than two arms; no challenger exists."""
