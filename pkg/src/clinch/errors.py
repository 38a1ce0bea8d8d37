"""Exception hierarchy shared by the engines and the command line."""


class ClinchError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ClinchError):
    """An auction instance violates one or more input requirements.

    ``violations`` holds every problem found, not just the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class InputError(ClinchError):
    """A document (instance or allocation file) could not be parsed."""


class DimensionError(ClinchError):
    """An allocation does not match the shape of its instance."""


class EngineInvariantError(ClinchError):
    """Internal invariant broken; always indicates a bug, never bad input."""
