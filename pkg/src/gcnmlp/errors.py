"""Exception hierarchy. CLI exit codes are keyed off these classes."""


class GcnMlpError(Exception):
    pass


class ConfigError(GcnMlpError, ValueError):
    """Invalid configuration or argument value."""


class DataError(GcnMlpError, ValueError):
    """Problem with input data (files, shapes, labels, splits)."""


class ParseError(DataError):
    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{self.path}:{lineno}: {message}")


class ValidationError(DataError):
    pass


class DimensionError(GcnMlpError, ValueError):
    pass


class CapExceededError(ConfigError):
    def __init__(self, n, cap):
        self.n = n
        self.cap = cap
        super().__init__(f"matrix size {n} exceeds eigensolver cap {cap}")


class StaleCacheError(GcnMlpError, RuntimeError):
    """Backward pass called with a cache whose parameters have since changed."""


class NumericalError(GcnMlpError, ArithmeticError):
    """Non-finite value encountered during training or evaluation."""


class AttackError(GcnMlpError, ValueError):
    pass
