"""Exception types shared across the package."""


class FbdpError(Exception):
    """Base class for package errors."""


class DomainError(FbdpError, ValueError):
    """Input outside the mathematically supported domain."""


class UnsupportedDomainError(DomainError):
    """Input is valid mathematically but outside this implementation's scope."""


class AccuracyError(FbdpError):
    """Requested accuracy cannot be certified for these inputs."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ResourceError(FbdpError):
    """A configured cap (steps, jumps, memory) was exceeded."""


class NumericalError(FbdpError):
    """An iterative numerical procedure failed to converge."""
