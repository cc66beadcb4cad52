"""Exception types shared across the package."""


class PomtransError(Exception):
    """Base class for all package errors."""


class ParameterError(PomtransError):
    """Invalid, inconsistent, or unknown input parameters."""


class UnknownNodeError(PomtransError):
    """A graph operation referenced a node id that does not exist."""

    def __init__(self, node_id):
        super().__init__(f"unknown node id: {node_id!r}")
        self.node_id = node_id


class EdgeGainError(PomtransError):
    """An edge gain function failed to evaluate; carries the edge identity."""

    def __init__(self, src, dst, cause):
        super().__init__(f"gain evaluation failed on edge {src!r} -> {dst!r}: {cause}")
        self.src = src
        self.dst = dst


class SingularityError(PomtransError):
    """The linear network is singular at the requested frequency."""

    def __init__(self, omega, detail=""):
        msg = f"singular network response at omega = {omega!r} rad/s"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.omega = omega


class ModelViolationError(PomtransError):
    """A physical bound was violated, signalling an invalid parameter set."""


class UndefinedOptimumError(PomtransError):
    """An optimum was requested for a configuration where none exists."""


class GridError(PomtransError):
    """A sampling grid is unusable for the requested operation."""


class MaterialDataError(PomtransError):
    """Missing or malformed material property data."""
