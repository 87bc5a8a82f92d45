"""Exception hierarchy shared by all csradar modules."""


class CsRadarError(ValueError):
    """Base class for every error raised by the package."""


class DimensionError(CsRadarError):
    """Vector or operator dimensions are inconsistent."""


class InvalidDimensionError(DimensionError):
    """A requested length is outside the supported range."""


class InvalidCyclicPrefixError(CsRadarError):
    pass


class RangeError(CsRadarError):
    pass


class InvalidCompositionError(CsRadarError):
    pass


class SceneInvalidError(CsRadarError):
    """A scene violates the cyclic-prefix delay bound or is malformed."""


class InvalidPowerError(CsRadarError):
    pass


class InvalidInputError(CsRadarError):
    """Non-finite or otherwise unusable numeric input."""


class InvalidTonesError(CsRadarError):
    pass


class InvalidKError(CsRadarError):
    pass


class SizeError(CsRadarError):
    """An exhaustive enumeration would be too large."""


class ConfigError(CsRadarError):
    """Configuration file or sweep specification is invalid."""


class FormatError(CsRadarError):
    """A CSR1 record could not be parsed."""
