"""Exception hierarchy shared by the library and the CLI."""


class InputError(ValueError):
    """Raised for malformed or inconsistent user input."""


class ParseError(InputError):
    """Raised when a model, gamble or certificate file cannot be read.

    ``path`` locates the offending field (e.g. ``"dynamics.stationary.a[0]"``).
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class UnsupportedOperationError(InputError):
    """Raised when an operation does not apply to the model's dynamics."""


class SolverError(RuntimeError):
    """Raised when a linear program cannot be solved reliably.

    The offending instance is kept on ``instance`` for inspection.
    """

    def __init__(self, message, instance=None):
        super().__init__(message)
        self.instance = instance


class ConstructionError(RuntimeError):
    """Raised when a proof construction fails its own post-condition."""

    def __init__(self, message, instance=None):
        super().__init__(message)
        self.instance = instance


class NotAlmostDesirableError(InputError):
    """Raised when a selection has a negative conditional lower expectation
    somewhere it was required to be almost-desirable."""

    def __init__(self, message, situation=None, value=None):
        super().__init__(message)
        self.situation = situation
        self.value = value
