"""Exception types shared across the package.

Every input-validation failure raises a specific subclass so that callers
(and the CLI) can distinguish bad instances from internal bugs.
"""

from __future__ import annotations


class NetbargainError(Exception):
    """Base class for all errors raised by this package."""


class InstanceError(NetbargainError):
    """An instance description violates a structural rule."""


class SelfLoopError(InstanceError):
    """An edge joins a vertex to itself."""


class DuplicateEdgeError(InstanceError):
    """The same unordered vertex pair appears twice in the edge list."""


class NegativeWeightError(InstanceError):
    """An edge weight is negative."""


class NonBipartiteEdgeError(InstanceError):
    """A bipartite mode contains an edge inside one side."""


class CapacityViolatesModeError(InstanceError):
    """A vertex capacity is not allowed by the instance mode."""


class ParseError(NetbargainError):
    """A JSON document does not follow the instance/allocation format."""


class InvalidParamsError(NetbargainError):
    """Generator parameters are out of range or inconsistent."""


class TooLargeError(NetbargainError):
    """The requested exhaustive computation exceeds its size guard."""


class WrongModeError(NetbargainError):
    """The operation is not defined for the instance's mode."""


class OutcomeInvariantViolation(NetbargainError):
    """An outcome's contracts or splits break a structural invariant."""


class NotAContractEdgeError(NetbargainError):
    """An edge passed as a contract is not in the outcome's contract set."""


class NotStableError(NetbargainError):
    """An operation that requires a stable outcome received an unstable one."""


class NotEfficientError(NetbargainError):
    """An allocation does not distribute exactly the grand-coalition value."""


class LengthMismatchError(NetbargainError):
    """Two excess profiles of different lengths were compared."""


class LPError(NetbargainError):
    """A linear program is malformed (unknown variable, duplicate name...)."""


class InfeasibleFaceError(LPError):
    """max_over_face was asked for an objective value the LP cannot attain."""


class LPInternalError(LPError):
    """An exact self-check inside the LP solver failed; indicates a bug."""
