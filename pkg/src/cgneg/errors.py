"""Exception types raised by cgneg."""


class CgnegError(Exception):
    """Base class for all library errors."""


class DegreeTooLarge(CgnegError, ValueError):
    """Exact-arithmetic polynomial degree exceeds the supported cap."""


class ResolutionTooCoarse(CgnegError, ValueError):
    """Grid cells are too large to resolve the state's oscillations."""


class KernelUnderresolved(CgnegError, ValueError):
    """Gaussian kernel width spans too few grid cells."""


class NoInteriorMaximum(CgnegError, ValueError):
    """A sweep column has its maximum at an end of the n range."""
