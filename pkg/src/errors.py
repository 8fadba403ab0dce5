"""Exception hierarchy shared by all simulator packages"""

from typing import Optional


class ConfigurationError(ValueError):
    """Invalid user input: parameters, files or grids"""


class SystemFileError(ConfigurationError):
    """Spin-system description file failed validation"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        self.reason = message
        location = []
        if field:
            location.append(f"field '{field}'")
        if line is not None:
            location.append(f"line {line}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class DimensionError(ConfigurationError):
    """Operator or state dimensions do not agree, or exceed the cap"""


class HorizonError(ConfigurationError):
    """No decay channel is available to bound the integration horizon"""


class GridSizeError(ConfigurationError):
    """Sweep grid is empty or larger than the configured cap"""


class NumericalError(RuntimeError):
    """A computation produced an unusable result"""


class InvalidStateError(NumericalError):
    """Density matrix has eigenvalues below the numerical floor"""


class IntegrationError(NumericalError):
    """Time integration diverged"""


class UndefinedCorrelationError(NumericalError):
    """Correlation requested on data without variance"""
