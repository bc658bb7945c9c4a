"""Exception types shared across the package."""


class DapipError(Exception):
    """Base class for all package errors."""


class DslSyntaxError(DapipError):
    """Malformed program text. Carries the character offset of the problem."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnknownApiError(DapipError):
    """An API name that is not in the catalog."""


class ArityError(DapipError):
    """Concat with no children or more than the supported maximum."""


class CompleteTreeError(DapipError):
    """Raised when an operation needs an unexpanded leaf but the tree is complete."""


class InvalidExpansionError(DapipError):
    """Expansion whose leaf is not on the frontier or whose rule does not apply."""


class DataFormatError(DapipError):
    """Malformed data file. Message names the file and line."""


class MissingTableError(DapipError):
    """A required dictionary table is absent or empty."""


class UnsatisfiableProgramError(DapipError):
    """No input satisfying every API precondition of the program was found.

    Carries the offending program; the message is rendered lazily because
    the generation pipeline raises and catches this on a hot path.
    """

    def __str__(self) -> str:
        if self.args and not isinstance(self.args[0], str):
            from .dsl import print_program
            return print_program(self.args[0])
        return super().__str__()


class ShapeMismatchError(DapipError):
    """Tensor operands with incompatible shapes."""


class GrammarMismatchError(DapipError):
    """Checkpoint whose grammar fingerprint differs from the current grammar."""
