"""Exception types shared across the package."""


class PlumbError(Exception):
    """Base class for all domain errors."""


class SchemaError(PlumbError):
    """Malformed graph/series file or inconsistent job flags."""


class NotNegativeDefinite(PlumbError):
    """The intersection form fails the alternating-minor test."""


class NotApplicable(PlumbError):
    """A rewriting move does not pattern-match at the requested location."""


class LosesDefiniteness(PlumbError):
    """An operation would leave the negative definite cone."""


class GradingParity(PlumbError):
    """A grading level is not congruent to the top level mod 2."""


class InsufficientDepth(PlumbError):
    """The materialized truncation window is too shallow to certify the answer."""


class FamilyDomainError(PlumbError):
    """A weight family was evaluated outside its validated table domain."""


class NotZHS(PlumbError):
    """The ambient manifold is not an integer homology sphere."""


class NonAutomorphism(PlumbError):
    """A vertex permutation does not preserve the graph and its framings."""
