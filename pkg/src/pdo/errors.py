"""Exception hierarchy shared by every module.

Callers that only care about "the computation failed" catch ``PdoError``.
``NegativeResult`` subclasses mark outcomes where the computation ran to
completion and the answer is "no" within the explored horizon; the CLI maps
those to exit code 2.
"""


class PdoError(Exception):
    pass


class NegativeResult(PdoError):
    pass


# algebra core
class ZeroConstantTerm(PdoError, ZeroDivisionError):
    pass


class ZeroInput(PdoError, ValueError):
    pass


class WindowTooSmall(PdoError):
    pass


class EmptyResultWindow(PdoError):
    pass


class WindowOverflow(PdoError):
    pass


class CoordinateMismatch(PdoError, ValueError):
    pass


# operators
class PrecisionExhausted(PdoError):
    pass


class ZeroOperator(PdoError, ValueError):
    pass


class PrecisionZero(ZeroOperator):
    """The operator vanishes at stored precision; exact zero is not claimed."""


class ParseError(PdoError, ValueError):
    pass


# spectral
class NonConstantSymbol(PdoError, ValueError):
    pass


class SymbolConditionFailed(NegativeResult):
    pass


class BudgetExceeded(PdoError):
    pass


class NotStabilized(NegativeResult):
    pass


class NotCommutative(NegativeResult):
    pass


# schur
class NoRankFits(NegativeResult):
    pass


# glue / cmtools
class NoNoetherPair(NegativeResult):
    pass


class NoConductorFound(NegativeResult):
    pass
