"""Exception types shared across the package."""


class HiScriptError(Exception):
    """Base class for every error raised by hiscript."""

    exit_code = 1

    def __init__(self, message, code=None):
        super().__init__(message)
        self.code = code or type(self).__name__.upper()


class ValidationError(HiScriptError, ValueError):
    """Input violates a documented precondition or invariant.

    ``violations`` carries machine-readable codes when the error comes from
    structural validation of a script.
    """

    exit_code = 2

    def __init__(self, message, code="VALIDATION", violations=()):
        super().__init__(message, code)
        self.violations = tuple(violations)


class ConfigurationError(HiScriptError):
    exit_code = 2


class LeakageError(ConfigurationError):
    """A local model was asked to fit on dev or test material."""


class BackendError(HiScriptError):
    """A scoring backend failed.

    ``retryable`` marks transport-level failures (timeouts, 5xx) and
    ``request_ids`` lists every request attempted for the failing call.
    """

    exit_code = 3

    def __init__(self, message, code="BACKEND", retryable=False, request_ids=(), status=None):
        super().__init__(message, code)
        self.retryable = retryable
        self.request_ids = list(request_ids)
        self.status = status


class StageError(HiScriptError):
    exit_code = 4

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        code = getattr(cause, "code", type(cause).__name__)
        super().__init__(f"stage {stage!r} failed: {cause}", code)
