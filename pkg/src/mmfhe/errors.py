"""Exception types shared across the package."""


class FheError(Exception):
    """Base class for all errors raised by mmfhe."""


class NoInverse(FheError, ValueError):
    pass


class SearchExhausted(FheError, ValueError):
    pass


class BasisMismatch(FheError, ValueError):
    pass


class TableMismatch(FheError, ValueError):
    pass


class ShapeError(FheError, ValueError):
    pass


class DecompositionOverflow(FheError, ValueError):
    pass


class SlotOverflow(FheError, ValueError):
    pass


class LevelMismatch(FheError, ValueError):
    pass


class ScaleMismatch(FheError, ValueError):
    pass


class RepError(FheError, ValueError):
    """Polynomial is in the wrong representation for the requested op."""


class KeyNotFound(FheError, KeyError):
    pass


class NoLevelsLeft(FheError, ValueError):
    pass


class IndexOutOfRange(FheError, IndexError):
    pass


class DimensionMismatch(FheError, ValueError):
    pass


class NegacyclicViolation(FheError, ValueError):
    pass


class UnsupportedOp(FheError, ValueError):
    pass


class UnsupportedSize(FheError, ValueError):
    pass


class FormatError(FheError, ValueError):
    """Malformed serialized container."""
