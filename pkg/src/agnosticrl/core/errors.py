"""Exception hierarchy shared by every agnosticrl module.

Each exception carries the process exit code the CLI reports for it.
"""


class AgnosticRLError(Exception):
    """Base exception for agnosticrl operations"""

    exit_code = 1


class ValidationError(AgnosticRLError):
    """Exception raised when an input violates a precondition"""

    pass


class FormatError(ValidationError):
    """Exception raised when a text file cannot be parsed"""

    pass


class ConfigError(ValidationError):
    """Exception raised when an experiment config is unreadable or invalid"""

    pass


class GuardExceeded(AgnosticRLError):
    """Exception raised when a size guard, budget or loop cap is exceeded"""

    exit_code = 2


class AcceptanceFailure(AgnosticRLError):
    """Exception raised when a recipe's statistical acceptance check fails"""

    exit_code = 3

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
