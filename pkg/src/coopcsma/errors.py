"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Invalid scenario or model parameters."""


class DegenerateGeometryError(ValueError):
    """Two nodes share a position (zero link distance)."""


class TimeRegressionError(ValueError):
    """A time-dependent state was asked to move backwards."""


class TraceGapError(ValueError):
    """A piecewise SINR trace does not cover its interval contiguously."""


class RetryExhaustedError(RuntimeError):
    """Attempt index reached the short retry limit."""


class QuadratureError(RuntimeError):
    """Grid quadrature failed its self-consistency check."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3g})")
        self.residual = residual


class SamplingStarvationError(RuntimeError):
    """Rejection sampling exhausted its retry budget."""


class InvariantViolation(RuntimeError):
    """Internal simulation invariant broken (e.g. event scheduled in the past)."""


class BatchError(RuntimeError):
    """A replication inside a batch aborted; ``seed`` names it."""

    def __init__(self, seed, cause):
        super().__init__(f"replication with seed {seed} failed: {cause!r}")
        self.seed = seed
        self.cause = cause
