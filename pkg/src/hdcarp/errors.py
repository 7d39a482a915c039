"""Exception types shared across the solver suite."""


class SolverError(Exception):
    """Base class for solver faults (as opposed to validation findings)."""


class NotStronglyConnectedError(SolverError):
    """Raised when shortest-path computation hits an unreachable node pair."""


class ConstructionError(SolverError):
    """Raised when the greedy constructor cannot place an arc on any vehicle."""


class InfeasibleSolutionError(SolverError):
    """Raised when an operation requires a feasible solution but got violations."""

    def __init__(self, violations):
        super().__init__("infeasible solution: " + "; ".join(violations))
        self.violations = list(violations)


class LimitExceededError(SolverError):
    """Raised when an exact-method size limit is exceeded."""
