"""Exception hierarchy shared by every salvo_sim module."""


class SalvoError(Exception):
    """Base class for all salvo_sim errors."""


class DegenerateGeometryError(SalvoError):
    """Pursuer and target positions coincide, or a guidance law's geometry is invalid."""


class SingularSpeedError(SalvoError):
    """An agent's speed fell below the configured floor."""


class TopologyError(SalvoError):
    """The communication digraph is malformed or not strongly connected."""


class GuidanceError(SalvoError):
    """A time-to-go formula cannot be evaluated for the given state."""


class ConfigError(SalvoError):
    """A scenario file or assignment violates its schema or constraints."""


class ObservationRangeError(SalvoError):
    """An observation was requested outside the recorded time span."""
