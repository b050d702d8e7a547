"""Error hierarchy shared by every snakelab app."""


class SnakelabError(Exception):
    """Base class for all laboratory errors."""


class ArgumentError(SnakelabError, ValueError):
    """An operation was called with arguments outside its contract."""


class SizeLimitError(SnakelabError):
    """An exact construction would exceed a configured cap or budget.

    Attributes:
        size (int): The computed size that triggered the refusal
        cap (int): The configured limit
    """

    def __init__(self, message, size=None, cap=None):
        super().__init__(message)
        self.size = size
        self.cap = cap


class DisconnectedGraphError(SnakelabError):
    """The generator set does not generate the group (graph is disconnected)."""


class GraphValidationError(SnakelabError):
    """A supplied automorphism family fails vertex-transitivity checks.

    Attributes:
        vertex (int): The x whose sigma_x failed
        edge (tuple): The offending edge, when an edge check failed
    """

    def __init__(self, message, vertex=None, edge=None):
        super().__init__(message)
        self.vertex = vertex
        self.edge = edge


class UnsupportedMethodError(SnakelabError):
    """The requested construction does not apply to this kind of graph."""


class InternalConsistencyError(SnakelabError):
    """A computation contradicted a hypothesis it was entitled to assume."""


class VerificationError(SnakelabError):
    """A property check ran to completion and failed."""
