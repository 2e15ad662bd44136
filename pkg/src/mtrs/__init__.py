"""Driver/rider matching for ridesharing feeders to public transit."""

from .errors import (CardinalityMismatch, ConfigError, DegenerateWindow, GenerationExhausted,
                     Infeasible, MTRSError, NegativeDetour, NoJourney, OutOfBounds, Unreachable)
from .model import (Driver, DriverKind, Instance, Location, MatchType, Problem, Rider,
                    RoadEdge, RoadNetwork, StopEvent, TransitTimetable, Trip,
                    check_assumption1, check_assumption2, validate_instance)

__version__ = "0.1.0"
