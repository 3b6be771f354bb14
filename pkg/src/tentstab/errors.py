"""Exception types shared across the package."""


class Error(Exception):
    """Base class for all tentstab errors."""


class InvalidPolygon(Error):
    """Vertex list is not a valid counter-clockwise convex polygon."""


class DegeneratePolygon(Error):
    """Operation requires a polygon with positive area."""


class SingularMatrix(Error):
    """2x2 linear part is not invertible at the working tolerance."""


class ParameterOutOfRange(Error):
    """Map or run parameter outside its admissible interval."""


class OutsideRegion(Error):
    """Point does not belong to the map's region."""


class RegionMismatch(Error):
    """Two objects are defined over different regions."""


class ResolutionTooLow(Error):
    """Discretization grid fails to capture the map's image."""


class ZeroVariation(Error):
    """Ratio undefined because the function has zero variation."""


class CellExplosion(Error):
    """Exact pushforward arrangement exceeded the cell budget."""


class OrbitHitsCriticalSet(Error):
    """Orbit repeatedly landed on a branch boundary despite reseeding."""


class NoConvergence(Error):
    """Iteration hit its step budget.

    Iterative routines normally return their last iterate tagged with the
    achieved residual instead of raising; this class exists for callers
    that want to escalate an unconverged result.
    """

    def __init__(self, message, result=None, residual=None):
        super().__init__(message)
        self.result = result
        self.residual = residual


class ConfigError(Error):
    """Invalid command-line configuration; message names the flag."""
