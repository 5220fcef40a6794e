"""Exception hierarchy shared by every module."""


class HoneyauthError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(HoneyauthError):
    """Invalid configuration, unknown profile/key, or out-of-domain argument."""


class EnrollError(HoneyauthError):
    pass


class GenerationError(HoneyauthError):
    """Decoy generation could not satisfy its constraints."""

    def __init__(self, message, constraint=None):
        super().__init__(message)
        self.constraint = constraint


class ParseError(HoneyauthError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TrainError(HoneyauthError):
    pass


class ProtocolError(HoneyauthError):
    """Honeychecker protocol failure; ``code`` is one of RANGE, UNKNOWN, SYNTAX."""

    def __init__(self, code, message=""):
        super().__init__(message or code)
        self.code = code


class CheckerUnavailable(HoneyauthError):
    """The honeychecker could not be reached."""
