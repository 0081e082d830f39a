"""Exception hierarchy. Everything derives from ``KerrTrapError``."""


class KerrTrapError(Exception):
    pass


class DomainError(KerrTrapError, ValueError):
    """Point lies outside the exterior region or the pole band."""


class PoleExclusion(DomainError):
    pass


class DegenerateRoots(KerrTrapError):
    pass


class NoRealRoot(KerrTrapError):
    pass


class NoInteriorCritical(KerrTrapError):
    """The radial potential is monotone on the exterior interval."""


class NotNearTrapping(DomainError):
    pass


class ExhaustedDraws(KerrTrapError):
    pass


class StepFailure(KerrTrapError):
    pass


class DomainExit(KerrTrapError):
    pass


class NoCrossing(KerrTrapError):
    pass


class OutOfRange(KerrTrapError):
    pass


class PathEscape(KerrTrapError):
    pass


class DegenerateFit(KerrTrapError):
    pass
