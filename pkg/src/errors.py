from typing import Optional


class BellconeError(Exception):
    """Root of every error raised by bellcone."""


class StructuralError(BellconeError):
    """
    Input does not have the structure an operation expects: wrong array
    dimensions, malformed files, missing fields.

    field: Optional[str]
        Dotted path of the offending field (e.g. `scenario.mA`), if known
    line: Optional[int]
        1-based line of the offending input, if known
    """

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class ShapeMismatchError(StructuralError):
    pass


class UnsupportedScenarioError(BellconeError):
    pass


class InvalidParameterError(BellconeError, ValueError):
    pass


class PartitionError(InvalidParameterError):
    pass


class NonFiniteInputError(BellconeError, ValueError):
    pass


class AsymmetricMatrixError(BellconeError, ValueError):
    pass


class PoleError(BellconeError, ValueError):
    pass


class EnumerationLimitError(BellconeError):
    pass


class CertificateMismatchError(BellconeError):
    pass


class ConvergenceError(BellconeError):
    pass
