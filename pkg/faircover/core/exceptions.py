# faircover/core/exceptions.py
from typing import Optional


class FairCoverError(Exception):
    """Base class for every error raised by the solvers"""


class InputError(FairCoverError, ValueError):
    """Malformed instance data, unknown ids or unparsable files"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OracleCapExceeded(InputError):
    """A brute-force oracle was asked to enumerate an instance above its cap"""


class ContractViolation(FairCoverError):
    """A caller handed a lifting or rounding step an input outside its precondition"""


class InvariantViolation(FairCoverError):
    """An internal guarantee of a solver did not hold"""
