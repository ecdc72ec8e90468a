"""Exception types raised by the lab."""


class WillmoreLabError(Exception):
    """Base class for every error raised by this package."""


class DegenerateImmersion(WillmoreLabError):
    """The induced metric is (numerically) singular somewhere on the grid."""


class UnsupportedOrder(WillmoreLabError, ValueError):
    pass


class ResolutionError(WillmoreLabError, ValueError):
    """A perturbation mode is not resolvable on the target grid."""


class PoleSingularity(WillmoreLabError):
    """A point was sent through the pole of a conformal map.

    ``index`` holds the offending grid node (or sample index) when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegenerateCloud(WillmoreLabError):
    pass


class EmptyCloud(WillmoreLabError, ValueError):
    pass


class SingularCovariance(WillmoreLabError):
    pass


class NotGraphLike(WillmoreLabError):
    pass


class KernelObstruction(WillmoreLabError):
    """The right-hand side has a component in Ker(Laplacian + 2)."""


class ConfigError(WillmoreLabError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
