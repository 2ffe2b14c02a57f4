"""Exception types shared across the package."""


class MonodinoError(Exception):
    """Base class for all package-specific errors."""


class BehindCamera(MonodinoError):
    """A point or object lies at nonpositive depth in front of the camera."""


class ValidationError(MonodinoError):
    """A domain value violates its invariants (e.g. nonpositive box dims)."""


class ParseError(MonodinoError):
    """Malformed label or calibration text."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ShapeError(MonodinoError):
    """Tensor or image shape incompatible with the requested operation."""


class ConfigError(MonodinoError):
    """Invalid or inconsistent configuration."""


class PlacementError(MonodinoError):
    """Scene generator could not place objects without overlap."""


class DomainError(MonodinoError):
    """Argument outside the mathematical domain of the operation."""


class OverflowClassError(MonodinoError):
    """The overflow depth class has no finite bin center."""


class CapacityError(MonodinoError):
    """Fewer queries than ground-truth objects to match."""


class LoadError(MonodinoError):
    """Checkpoint could not be loaded or does not match the model."""
