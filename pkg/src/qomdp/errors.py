"""Exception hierarchy shared by every module."""

from __future__ import annotations


class QomdpError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(QomdpError, ValueError):
    pass


class DimensionTooSmall(QomdpError, ValueError):
    pass


class IndexOutOfRange(QomdpError, IndexError):
    pass


class NotHermitian(QomdpError, ValueError):
    pass


class NoConvergence(QomdpError, RuntimeError):
    pass


class NonHermitianReward(NotHermitian):
    pass


class ZeroProbabilityBranch(QomdpError, ValueError):
    """Conditioning on a quantum branch whose probability is (numerically) zero."""


class ZeroProbabilityObservation(QomdpError, ValueError):
    """Conditioning a belief on an observation that cannot occur."""


class ProbabilityError(QomdpError, ValueError):
    """A computed probability fell outside [0, 1] by more than roundoff."""


class InvalidKraus(QomdpError, ValueError):
    pass


class EmptySequence(QomdpError, ValueError):
    pass


class PathExtinguished(QomdpError):
    """The non-goal branch of a policy path has vanished.

    ``step`` is the 1-based time step at which the surviving trace dropped
    to zero.
    """

    def __init__(self, step: int, trace: float):
        super().__init__(f"non-goal branch extinguished at step {step} (trace {trace:.3e})")
        self.step = step
        self.trace = trace


class NotEmbeddable(QomdpError, ValueError):
    def __init__(self, deviation: float, action: int):
        super().__init__(
            f"square-root Kraus family of action {action} is not complete "
            f"(max deviation {deviation:.3e})"
        )
        self.deviation = deviation
        self.action = action


class MissingChild(QomdpError, ValueError):
    pass


class BudgetExceeded(QomdpError, RuntimeError):
    def __init__(self, nodes_expanded: int):
        super().__init__(f"node budget exceeded after {nodes_expanded} expansions")
        self.nodes_expanded = nodes_expanded


class StateBudgetExceeded(QomdpError, RuntimeError):
    def __init__(self, num_states: int):
        super().__init__(f"reachable support states exceed the cap ({num_states})")
        self.num_states = num_states


class ParseError(QomdpError, ValueError):
    pass


class ValidationError(QomdpError, ValueError):
    """Model failed invariant checks; ``violations`` lists each failure."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"{len(self.violations)} invariant violation(s): {lines}")
