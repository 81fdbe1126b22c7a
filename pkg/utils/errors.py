"""
Domain errors. Every error raised by the models and analyses derives from
PseudoJuntaError, which the CLI maps to exit code 1.
"""
from contextlib import contextmanager


class PseudoJuntaError(Exception):
    """Base class for all domain errors."""


class EmptySpace(PseudoJuntaError):
    pass


class NonPositiveWeight(PseudoJuntaError):
    pass


class WeightsNotNormalized(PseudoJuntaError):
    pass


class SymbolOutOfRange(PseudoJuntaError):
    pass


class EnumerationCapExceeded(PseudoJuntaError):
    """Raised when an exact sum would enumerate more outcomes than the cap.
    Callers should fall back to a sampling path."""


class TableLengthMismatch(PseudoJuntaError):
    pass


class NonBooleanValue(PseudoJuntaError):
    pass


class UnknownBuiltin(PseudoJuntaError):
    pass


class AlphabetNotBinary(PseudoJuntaError):
    pass


class SupportMismatch(PseudoJuntaError):
    pass


class NotIncreasing(PseudoJuntaError):
    pass


class NotMeasurable(PseudoJuntaError):
    pass


class MonotonicityViolated(PseudoJuntaError):
    pass


class NoQualifyingAtom(PseudoJuntaError):
    pass


class ScheduleInfeasible(PseudoJuntaError):
    pass


class InvalidParameter(PseudoJuntaError, ValueError):
    """Malformed input: bad grid, bad epsilon, bad override, bad JSON spec."""


@contextmanager
def malformed(what: str):
    """Turn lookup and conversion failures while reading a document into InvalidParameter."""
    try:
        yield
    except PseudoJuntaError:
        raise
    except (KeyError, IndexError, TypeError, ValueError, AttributeError) as e:
        raise InvalidParameter(f"Malformed {what}: {type(e).__name__}: {e}") from e
