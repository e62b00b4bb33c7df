class UsageError(ValueError):
    """Caller violated an operation's contract (e.g. acting on a terminal state)."""


class NotEnumerableError(RuntimeError):
    """State-space enumeration was requested beyond the configured cap."""


class ConfigError(ValueError):
    """Invalid experiment configuration (bad key, type, or range)."""


class TrainingAborted(RuntimeError):
    """Training hit a non-finite loss; carries a diagnostic snapshot."""

    def __init__(self, message, snapshot=None):
        super().__init__(message)
        self.snapshot = snapshot or {}
