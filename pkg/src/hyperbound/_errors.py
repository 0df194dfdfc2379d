"""Exception hierarchy shared by all solver modules."""


class HyperboundError(Exception):
    """Base class for solver errors."""


class UnsupportedTerm(HyperboundError):
    """A potential term maps a basis ket outside the closed basis family."""


class NotTriangular(HyperboundError):
    """The quasi-Hamiltonian has an entry above its diagonal."""


class NoNullVector(HyperboundError):
    """The leading block has no null vector (wrong partition offset)."""


class SingularBlock(HyperboundError):
    """A diagonal block of the partitioned matrix is not invertible."""


class SlowConvergence(HyperboundError):
    """A series did not reach its tolerance within the term budget."""


class ZeroDenominator(HyperboundError, ZeroDivisionError):
    """A coefficient ratio was requested with a vanishing denominator."""


class NoRoots(HyperboundError):
    """No bound state was found in the requested range."""


class ExtrapolationUnstable(HyperboundError):
    """Roots along the epsilon ladder disagree beyond tolerance."""


class GridTooSmall(HyperboundError):
    """The oracle grid is too short for the eigenfunction to decay."""


class LevelMissing(HyperboundError):
    """The requested oracle level does not exist."""
