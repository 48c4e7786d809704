from typing import Optional


# Exit codes of the command-line tool
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT_ERROR = 2


class DCJException(Exception):
    """Base error; status_code doubles as the CLI exit code"""
    status_code = EXIT_FAILURE

    def __init__(self, detail: str, status_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if status_code is not None:
            self.status_code = status_code

    def __str__(self) -> str:
        return self.detail


class InputError(DCJException):
    status_code = EXIT_INPUT_ERROR


class ConfigError(InputError):
    """Config problem located by dotted field path and, when known, line number"""

    def __init__(self, detail: str, field: Optional[str] = None, line: Optional[int] = None):
        location = []
        if field:
            location.append(f"field '{field}'")
        if line is not None:
            location.append(f"line {line}")
        message = f"{detail} ({', '.join(location)})" if location else detail
        super().__init__(message)
        self.reason = detail
        self.field = field
        self.line = line


class ParseError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass


class BadParameter(ConfigError):
    pass


class MissingXiEta(InputError):
    pass


class InadmissibleState(InputError):
    pass


class NegativeCount(InputError):
    pass


class ExclusionViolated(InputError):
    pass


class DomainMismatch(InputError):
    pass


class EmptyTrajectory(InputError):
    pass


class Diverged(DCJException):
    """A weight series or partition function does not converge"""

    def __init__(self, detail: str, series: Optional[str] = None):
        super().__init__(detail)
        self.series = series


class Reducible(DCJException):
    pass


class MissingReverse(DCJException):
    pass


class AbsorbingState(DCJException):
    pass


class BudgetExceeded(DCJException):
    pass
