"""Exception hierarchy.

Everything raised on purpose by the library derives from :class:`BinodalError`,
so the command line front end can map it onto a single exit code.
"""


class BinodalError(Exception):
    """Base class for numerical and domain failures."""


class DomainError(BinodalError, ValueError):
    """Argument outside the domain of a constitutive function (e.g. det F <= 0)."""


# numerics
class NoSignChange(BinodalError):
    pass


class MaxIterations(BinodalError):
    pass


class SingularJacobian(BinodalError):
    pass


class StepUnderflow(BinodalError):
    """Adaptive step collapsed; usually a singularity of the right-hand side."""

    def __init__(self, msg, x=None):
        super().__init__(msg)
        self.x = x


class DegenerateLeadingCoefficient(BinodalError, ValueError):
    pass


# jump set
class OutsideDomain(BinodalError):
    """Jump-set parametrisation has no real solution at this shared stretch."""


class NoWPoint(BinodalError):
    pass


# secondary jump set
class NoConvergence(BinodalError):
    pass


class LambdaOutOfRange(BinodalError):
    def __init__(self, msg, lam=None):
        super().__init__(msg)
        self.lam = lam


class OutsideWindow(BinodalError):
    pass


# pcx / nucleus
class IndeterminateVerdict(BinodalError):
    """The hydrostatic polyconvexity test could not decide; carries the open bracket."""

    def __init__(self, msg, lo=None, hi=None):
        super().__init__(msg)
        self.lo = lo
        self.hi = hi


class TailTooShort(BinodalError):
    pass
