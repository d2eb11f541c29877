"""Exception hierarchy shared by every nbx module.

The CLI turns any ``NbxError`` into a structured report using the class name,
so names here are part of the report format.
"""


class NbxError(Exception):
    """Base class for domain errors."""


class MalformedInput(NbxError):
    pass


class EmptyGraph(NbxError):
    pass


class NotATree(NbxError):
    pass


class DeadEnd(NbxError):
    """A non-backtracking walk reached a leaf it entered from its only neighbor."""


class WalkTruncated(NbxError):
    pass


class AllTruncated(NbxError):
    pass


class NoPairsAtDistance(NbxError):
    pass


class ShapeError(NbxError):
    pass


class IsolatedNode(NbxError):
    pass


class NonFiniteLoss(NbxError):
    pass


class DegenerateStart(NbxError):
    pass


class SpectrumNotConverged(NbxError):
    pass


class UsageError(NbxError):
    pass
