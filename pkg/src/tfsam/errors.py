"""Error types shared across the package.

Every error carries a ``code`` naming its kind; the CLI prints it verbatim.
"""

from __future__ import annotations


class TfsError(Exception):
    code = "Error"

    def __init__(self, message: str = "", **info):
        super().__init__(message)
        self.info = info

    def __str__(self) -> str:
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


# hierarchy construction
class DuplicateCharacterization(TfsError):
    code = "DuplicateCharacterization"


class UndeclaredType(TfsError):
    code = "UndeclaredType"


class NotAPartialOrder(TfsError):
    code = "NotAPartialOrder"


class NotBoundedComplete(TfsError):
    code = "NotBoundedComplete"

    def __init__(self, t1: str, t2: str, witnesses):
        self.t1, self.t2, self.witnesses = t1, t2, tuple(witnesses)
        super().__init__(f"{t1} and {t2} have minimal upper bounds {', '.join(self.witnesses)}")


class ApproprNonMonotone(TfsError):
    code = "ApproprNonMonotone"


class FeatureIntroductionViolation(TfsError):
    code = "FeatureIntroductionViolation"


class FeatureRedeclaredOnSubtype(TfsError):
    code = "FeatureRedeclaredOnSubtype"


# structures
class CyclicStructure(TfsError):
    code = "CyclicStructure"


class IndexOutOfRange(TfsError):
    code = "IndexOutOfRange"


class UnknownWord(TfsError):
    code = "UnknownWord"


# source language
class SourceSyntaxError(TfsError):
    code = "SyntaxError"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"line {line}, col {col}: {message}")


class UnknownMacro(TfsError):
    code = "UnknownMacro"


class ArityMismatch(TfsError):
    code = "ArityMismatch"


class UnknownFeature(TfsError):
    code = "UnknownFeature"


class InconsistentDescription(TfsError):
    code = "InconsistentDescription"


class UnorderableUnitRules(TfsError):
    code = "UnorderableUnitRules"


class NotAList(TfsError):
    code = "NotAList"


class NotASet(TfsError):
    code = "NotASet"


class UnknownGoal(TfsError):
    code = "UnknownGoal"


# machine
class InvalidInstruction(TfsError):
    code = "InvalidInstruction"


class RegisterOutOfRange(TfsError):
    code = "RegisterOutOfRange"


class InfiniteLoopGuard(TfsError):
    code = "InfiniteLoopGuard"


class FailAtTopLevel(TfsError):
    code = "FailAtTopLevel"


class ObjectFormatError(TfsError):
    code = "ObjectFormatError"
