"""Exception hierarchy shared by every layer of the simulator."""


class QtrajError(Exception):
    """Base class for all errors raised by qtraj."""


class ValidationError(QtrajError, ValueError):
    """An input failed a structural or numerical precondition."""


class DegenerateOutcomeError(QtrajError):
    """A measurement branch with (numerically) zero probability was selected."""


class InvariantViolation(QtrajError):
    """A numerical invariant (positivity, normalization, trace) broke during a run.

    ``invariant`` names the property that failed so callers such as the CLI
    can report it.
    """

    def __init__(self, invariant, message):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant
