"""Error types shared across the simulator."""


class ConfigError(ValueError):
    """A configuration value is missing, unknown, or out of range."""


class NoSignalError(RuntimeError):
    """No usable signal energy for the requested measurement."""


class AmbiguityError(RuntimeError):
    """Integer-ambiguity search produced no admissible candidate."""


class InfeasibleMeasurementError(RuntimeError):
    """Measured value is inconsistent with any physical geometry."""
