class HolosimError(Exception):
    """Base class for errors raised by holosim."""


class GridMismatchError(HolosimError, ValueError):
    pass


class SamplingError(HolosimError, ValueError):
    """Grid too coarse for the requested propagation distance."""


class DivergentEffectiveLength(HolosimError, ArithmeticError):
    """Equal-path incoherent geometry: the effective length Z' is infinite."""


class UnsupportedGeometryError(HolosimError, ValueError):
    pass


class ConfigError(HolosimError, ValueError):
    pass


class TemporalCoherenceWarning(UserWarning):
    """Unequal interferometer paths: a real source would need a long coherence length."""
