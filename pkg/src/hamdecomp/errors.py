"""Error hierarchy shared by every module.

Each class maps to one CLI exit code so that command handlers can translate
failures without inspecting messages.
"""


class HamDecompError(Exception):
    exit_code = 2


class DomainError(HamDecompError, ValueError):
    """Inputs outside the documented domain of an operation."""

    exit_code = 3


class ParseError(DomainError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ContractError(DomainError):
    """A structural precondition (regularity, validity of a system) failed."""


class InfeasibleError(HamDecompError):
    """A construction could not be completed on this input."""

    def __init__(self, message: str, stage: str | None = None, witness=None):
        self.stage = stage
        self.witness = witness
        if stage:
            message = f"[{stage}] {message}"
        super().__init__(message)


class ToleranceError(InfeasibleError):
    """A randomized construction exhausted its retry budget."""


class ResourceError(HamDecompError):
    """An exhaustive search was asked to run above its configured cap or deadline."""


class ConstructionError(InfeasibleError):
    """A local-move construction got stuck; carries the last partition."""
