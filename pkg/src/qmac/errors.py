"""Exception types raised across the package."""


class QmacError(Exception):
    """Base class for all errors raised by qmac."""


class InvalidState(QmacError, ValueError):
    pass


class DuplicateLabel(QmacError, ValueError):
    pass


class UnknownLabel(QmacError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class BadPermutation(QmacError, ValueError):
    pass


class LayoutMismatch(QmacError, ValueError):
    pass


class BadDistribution(QmacError, ValueError):
    pass


class BadProbability(QmacError, ValueError):
    pass


class DimMismatch(QmacError, ValueError):
    pass


class LabelCollision(QmacError, ValueError):
    pass


class SizeOverflow(QmacError, ValueError):
    pass


class ParseError(QmacError, ValueError):
    pass


class CompletenessViolation(QmacError, ValueError):
    """Kraus operators do not sum to the identity (channel not trace preserving)."""


class OverlappingSubsystems(QmacError, ValueError):
    pass


class NotClassicalConditioner(QmacError, ValueError):
    """A conditioning system has off-diagonal blocks, so it is not classical."""


class InvariantViolation(QmacError, RuntimeError):
    """A numerical identity that must hold for every evaluated state failed."""
