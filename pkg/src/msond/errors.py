"""Exception types shared across the simulator."""


class MsondError(Exception):
    """Base class for all simulator errors."""


class InvalidDimensionError(MsondError, ValueError):
    """A matrix/vector dimension is zero, negative, or incompatible."""


class ConfigurationError(MsondError, ValueError):
    """A network or experiment configuration violates its invariants."""


class InvalidArgumentError(MsondError, ValueError):
    """An argument is outside its documented domain (index, range, ...)."""


class SingularMatrixError(MsondError, ValueError):
    """A matrix that must be inverted is singular or too ill-conditioned."""


class InfeasibleSelectionError(MsondError, ValueError):
    """Not enough relay candidates remain to fill the requested slots."""
