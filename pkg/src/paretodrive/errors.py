"""Exception types shared across the package."""


class ParetoDriveError(Exception):
    """Base class for all package errors."""


class InfeasiblePower(ParetoDriveError):
    """Demanded wheel power exceeds what the battery can deliver."""


class HorizonNotReached(ParetoDriveError):
    """The prediction horizon distance was not covered within the time cap."""


class NoFeasibleControl(ParetoDriveError):
    """No constant torque satisfies the scenario constraints."""


class FrontExhausted(ParetoDriveError):
    """The continuation reached the far end of the Pareto front."""


class EmptyGrid(ParetoDriveError):
    """Scenario grid configuration enumerates to nothing."""


class NoFeasibleScenario(ParetoDriveError):
    """Library lookup found no feasible entry at or above the measured velocity."""


class EmptyFront(ParetoDriveError):
    """Compromise selection on an empty Pareto set."""


class FormatError(ParetoDriveError):
    """Malformed library, track, or log file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StallDetected(ParetoDriveError):
    """Vehicle at standstill and the selected torque cannot move it."""


class NoFeasiblePath(ParetoDriveError):
    """Dynamic program admits no velocity chain through the corridor."""


class TrackMismatch(ParetoDriveError):
    """Drive log and DP solution were produced on different tracks."""
