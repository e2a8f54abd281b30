"""Exception hierarchy shared by all gridpart modules."""

from __future__ import annotations

import enum


class GridpartError(Exception):
    """Base class for every error raised by gridpart."""


class ParseError(GridpartError):
    """Input file could not be parsed."""


class ValidationKind(str, enum.Enum):
    SELF_LOOP = "SelfLoop"
    PARALLEL_LINE = "ParallelLine"
    NON_POSITIVE_SUSCEPTANCE = "NonPositiveSusceptance"
    DISCONNECTED = "Disconnected"
    DUPLICATE_BUS_ID = "DuplicateBusId"
    DUPLICATE_LINE_ID = "DuplicateLineId"
    UNKNOWN_BUS = "UnknownBus"
    NO_SLACK_BUS = "NoSlackBus"
    ZERO_REACTANCE = "ZeroReactance"
    EMPTY = "Empty"


class ValidationError(GridpartError):
    """A network violates one of its structural invariants.

    The ``kind`` attribute tells callers which invariant failed.
    """

    def __init__(self, kind: ValidationKind, message: str = ""):
        self.kind = ValidationKind(kind)
        super().__init__(f"{self.kind.value}: {message}" if message else self.kind.value)


class ImbalancedInjection(GridpartError):
    """Injections do not sum to zero."""


class SingularSystem(GridpartError):
    """Reduced Laplacian is singular (the network is disconnected)."""


class ImbalancedComponent(GridpartError):
    def __init__(self, component: int, mismatch: float):
        self.component = component
        self.mismatch = mismatch
        super().__init__(f"component {component} is imbalanced by {mismatch:.3e}")


class BridgeColumn(GridpartError):
    """Matrix-route LODF requested for a bridge; use the extended factors."""


class NearSingularDenominator(GridpartError):
    pass


class NotABridge(GridpartError):
    pass


class IslandedAtBridge(GridpartError):
    """The bridge carries no flow, so the extended factor is undefined."""


class NoParticipatingBusInComponent(GridpartError):
    pass


class NoGenerators(GridpartError):
    pass


class TooLarge(GridpartError):
    """Network exceeds the exhaustive-enumeration guard."""


class DisconnectsGraph(GridpartError):
    pass


class UnknownLine(GridpartError, KeyError):
    pass


class WouldDisconnect(GridpartError):
    pass
