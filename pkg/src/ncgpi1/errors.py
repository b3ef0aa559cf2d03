"""Exception types shared across modules and mapped to CLI exit codes."""


class InvalidInput(ValueError):
    """Malformed or inconsistent input; ``path`` names the offending field."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DivergenceDetected(ArithmeticError):
    """An iterative computation did not reach its tolerance."""


class OutsideConvergenceRadius(ValueError):
    """A series was evaluated where it is not known to converge."""
