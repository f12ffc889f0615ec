"""Exception hierarchy; every error carries the CLI exit code it maps to."""

from __future__ import annotations

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_GUARD = 3
EXIT_BUDGET = 4
EXIT_INTERNAL = 5


class WittlabError(Exception):
    exit_code = EXIT_INTERNAL

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__


class ParseError(WittlabError):
    exit_code = EXIT_PARSE


class GuardError(WittlabError):
    exit_code = EXIT_GUARD


class BudgetError(WittlabError):
    exit_code = EXIT_BUDGET


class InternalError(WittlabError):
    exit_code = EXIT_INTERNAL


# parsing
class RingSyntaxError(ParseError):
    def __init__(self, message: str, line: int = 1, column: int = 1, **details):
        super().__init__(f"{message} (line {line}, column {column})", line=line,
                         column=column, **details)
        self.line = line
        self.column = column


class NonPrimePower(ParseError):
    pass


class NotCommutativeInput(ParseError):
    pass


# preconditions
class InfiniteDimensional(GuardError):
    pass


class DimensionMismatch(GuardError):
    pass


class ContextMismatch(GuardError):
    pass


class LengthUnderflow(GuardError):
    pass


class NotPerfect(GuardError):
    pass


class IdealNotNilpotent(GuardError):
    pass


class NoSolution(GuardError):
    pass


class NotSmoothGuard(GuardError):
    pass


class DerivativeNotUnit(GuardError):
    pass


class NotNilpotent(GuardError):
    pass


class NoQuasiInverse(GuardError):
    pass


class PrecisionTooLow(GuardError):
    pass


# budgets
class CapExceeded(BudgetError):
    pass


class UnitEnumerationTooLarge(BudgetError):
    pass


class SaturationBudgetExceeded(BudgetError):
    pass


class ExactSearchInfeasible(BudgetError):
    pass


class SymbolicRankBudget(BudgetError):
    pass


# internal consistency: these always indicate a bug
class IllDefinedOperator(InternalError):
    pass


class LiftFailure(InternalError):
    pass


class NoConvergence(InternalError):
    pass


class OracleMismatch(InternalError):
    pass
