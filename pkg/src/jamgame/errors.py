"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An operation was called with arguments outside its stated contract."""


class AssumptionError(RuntimeError):
    """Base class for empirical failures of the game's standing assumptions."""


class CoercivityError(AssumptionError):
    """A conditional payoff failed to climb past the sublevel threshold
    within the scan bound, so no compact control set could be bracketed."""


class ConnectednessError(AssumptionError):
    """The scanned payoff sublevel set is not a single interval."""


class RankingError(AssumptionError):
    """Channel ordering by conditional payoff fails somewhere on the
    control interval; the two-channel reduction is refused."""

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation  # (u, j, k) triple or None


class ScenarioError(ValueError):
    """Scenario document is missing a field or violates a constraint."""


class UnsupportedOperationError(RuntimeError):
    """The requested workflow is not defined for this payoff kind."""
