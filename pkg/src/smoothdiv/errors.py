"""Exception types shared across the package."""


class DomainError(ValueError):
    """A numeric argument lies outside the domain of the operation."""


class DimensionError(ValueError):
    """Vector arguments do not share a common dimension (a usage error)."""
