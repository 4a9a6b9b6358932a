"""Shared exception types; the CLI maps these to exit codes."""


class ConfigError(ValueError):
    """Invalid configuration (bad parameter combination, unknown key, ...)."""


class EmptyTargetError(ValueError):
    """Sublevel target mask came out empty; carries the offending gap."""

    def __init__(self, message, gap):
        super().__init__(message)
        self.gap = gap


class ConvergenceError(RuntimeError):
    """Iterative solver hit its iteration budget; carries the last residual."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual
