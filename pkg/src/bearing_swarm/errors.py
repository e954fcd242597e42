"""Exception types raised by the simulator."""


class InvalidGraph(ValueError):
    pass


class DegenerateEdge(ValueError):
    """Raised when two agents are too close for their bearing to be defined."""

    def __init__(self, message, edge=None):
        super().__init__(message)
        self.edge = edge


class InvalidScenario(ValueError):
    pass


class MissingBearing(KeyError):
    pass


class AnchorWithoutPosition(ValueError):
    pass


class ConfigError(ValueError):
    pass


class SimulationFailure(RuntimeError):
    """Base for failures that abort a run; carries the truncated trace."""

    def __init__(self, message, t=None, trace=None):
        super().__init__(message)
        self.t = t
        self.trace = trace


class CollisionFailure(SimulationFailure):
    def __init__(self, message, edge=None, t=None, trace=None):
        super().__init__(message, t=t, trace=trace)
        self.edge = edge


class NonFiniteState(SimulationFailure):
    pass
