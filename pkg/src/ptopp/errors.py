"""Exception hierarchy shared by every ptopp module."""


class PtoppError(Exception):
    """Base class for all library errors."""


class GeometryError(PtoppError):
    pass


class OverlappingObstacles(GeometryError):
    pass


class DegenerateRegion(GeometryError):
    pass


class ZeroVector(GeometryError):
    pass


class ScenarioError(PtoppError):
    pass


class PlacementFailure(ScenarioError):
    pass


class ParseError(ScenarioError):
    pass


class InvariantViolation(ScenarioError):
    def __init__(self, message: str, obstacle_id: int | None = None):
        super().__init__(message)
        self.obstacle_id = obstacle_id


class DegenerateInput(PtoppError):
    pass


class InconsistentGraph(PtoppError):
    pass


class InObstacle(PtoppError):
    pass


class OutOfBounds(PtoppError):
    pass


class WalkStuck(PtoppError):
    pass


class CycleDetected(PtoppError):
    pass


class EmptyIndex(PtoppError):
    pass


class CostError(PtoppError):
    pass


class UnboundedWeight(CostError):
    pass


class NonPositiveWidth(CostError):
    pass


class DegenerateWidths(CostError):
    pass


class NoPathFound(PtoppError):
    pass


class DisconnectedRoadmap(NoPathFound):
    pass
