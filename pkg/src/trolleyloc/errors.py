"""Exception hierarchy shared by all trolleyloc modules."""


class LocalizationError(Exception):
    """Base class for every error raised by this package."""


class DegeneratePair(LocalizationError, ValueError):
    """Two marker points coincide, so no direction can be defined between them."""


class TooFewPoints(LocalizationError, ValueError):
    pass


class DegenerateConfiguration(LocalizationError, ValueError):
    pass


class BehindCamera(LocalizationError, ValueError):
    pass


class TooFewAnchors(LocalizationError, ValueError):
    pass


class CollinearAnchors(LocalizationError, ValueError):
    pass


class NoConvergence(LocalizationError, RuntimeError):
    pass


class DegenerateCluster(LocalizationError, ValueError):
    pass


class EmptyGrid(LocalizationError, ValueError):
    pass


class EmptySamples(LocalizationError, ValueError):
    pass


class ConfigError(LocalizationError, ValueError):
    """Configuration file missing, unparsable or semantically invalid."""


class IoFailure(LocalizationError, OSError):
    pass
