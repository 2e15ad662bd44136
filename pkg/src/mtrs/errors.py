"""Exception types raised across the package."""


class MTRSError(Exception):
    """Base class for all package errors."""


class Unreachable(MTRSError):
    def __init__(self, origin, destination):
        super().__init__(f"no road path from vertex {origin} to vertex {destination}")
        self.origin = origin
        self.destination = destination


class NoJourney(MTRSError):
    """No timetable-respecting journey exists within the walking cap."""


class NegativeDetour(MTRSError):
    """A personal driver's route is shorter than its own fastest path."""


class Infeasible(MTRSError):
    def __init__(self, message, cluster_id=None, rider=None):
        super().__init__(message)
        self.cluster_id = cluster_id
        self.rider = rider


class DegenerateWindow(MTRSError):
    def __init__(self, agent_id, a, b):
        super().__init__(f"interval window of {agent_id} is empty: [{a}, {b}]")
        self.agent_id = agent_id
        self.a = a
        self.b = b


class OutOfBounds(MTRSError):
    pass


class CardinalityMismatch(MTRSError):
    pass


class GenerationExhausted(MTRSError):
    pass


class ConfigError(MTRSError):
    pass
