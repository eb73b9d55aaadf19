"""Exception types raised across the package."""


class QSDError(Exception):
    """Base class for every error raised by qsdlab."""


class ScopeError(QSDError):
    """The request falls outside what the workbench models."""


class NonConvex(ScopeError):
    pass


class MirrorMapOutOfRange(ScopeError):
    pass


class AmbientDegenerate(ScopeError):
    pass


class NotNarrow(QSDError):
    pass


class NarrowNotClosed(QSDError):
    pass


class OddDegree(QSDError):
    pass


class FlavorMismatch(QSDError):
    pass


class TruncationMismatch(QSDError):
    pass


class NotUnipotent(QSDError):
    pass


class SubstitutionOverflow(QSDError):
    pass


class NegativeLambdaPower(QSDError):
    def __init__(self, location, message=None):
        self.location = location
        super().__init__(message or f"negative power of lambda at {location}")


class CacheCorrupt(QSDError):
    pass
