"""
Error hierarchy for the susy app.

Verification failures are reported as verdicts, never raised. These exceptions
cover malformed input and requests the library cannot honour.
"""
from typing import Iterable, Optional


class NFoldSusyError(Exception):
    """Base class for every error raised by the package."""


class ExpressionError(NFoldSusyError):
    pass


class ExpressionSyntaxError(ExpressionError):
    """Malformed expression text; ``offset`` is a byte offset into the source."""

    def __init__(self, message: str, offset: int, text: Optional[str] = None):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownFunctionError(ExpressionSyntaxError):
    def __init__(self, name: str, offset: int, text: Optional[str] = None):
        self.name = name
        super().__init__(f"unknown function '{name}'", offset, text)


class OperatorFormatError(ExpressionSyntaxError):
    pass


class UnboundParameterError(ExpressionError):
    def __init__(self, names: Iterable[str]):
        self.names = tuple(sorted(names))
        super().__init__(f"unbound parameter(s): {', '.join(self.names)}")


class PoleError(ExpressionError):
    """Evaluation hit a singularity of ``subexpression`` at ``point``."""

    def __init__(self, subexpression: str, point: complex):
        self.subexpression = subexpression
        self.point = point
        super().__init__(f"pole of '{subexpression}' at q={point}")


class SamplingDomainError(NFoldSusyError):
    """Every sample point of a zero test landed on a pole."""


class SpecError(NFoldSusyError):
    pass


class PresetError(SpecError):
    pass


class DiscretizationError(NFoldSusyError):
    pass


class ConfigError(NFoldSusyError):
    pass
