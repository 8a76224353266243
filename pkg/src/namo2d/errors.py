"""Exception hierarchy shared across the toolkit."""


class Namo2dError(Exception):
    """Base class for all toolkit errors."""


# --- geometry ---

class DegenerateInput(Namo2dError):
    """Input has too few points or no area (e.g. collinear hull input)."""


class NonUnitNormal(Namo2dError):
    """A direction that must be unit length is not."""


# --- perception ---

class NoFit(Namo2dError):
    """RANSAC found no model with enough inliers."""


class EmptyCluster(Namo2dError):
    """Primitive extraction was asked to run on an empty cluster."""


# --- affordance ---

class NoLiftHypothesis(Namo2dError):
    """Lift validation requested for an obstacle with no lift hypothesis."""


class NoPushHypothesis(Namo2dError):
    """Push validation requested for an obstacle with no push hypothesis."""


# --- dynamics ---

class NonFiniteState(Namo2dError):
    """Integration produced NaN or Inf."""

    def __init__(self, msg, step_index=None):
        super().__init__(msg)
        self.step_index = step_index


# --- trajectory optimization ---

class DimensionMismatch(Namo2dError):
    """Trajectory/control lengths are inconsistent."""


class SubproblemInfeasible(Namo2dError):
    """Convex subproblem constraints admit no solution."""


class MaxInnerIterations(Namo2dError):
    """QP solver hit its iteration cap without reaching tolerance."""


# --- navigation ---

class NoPath(Namo2dError):
    """A* could not connect start and goal."""


class OutOfBounds(Namo2dError):
    """Query point outside the occupancy grid."""


class NoPlacementFound(Namo2dError):
    """No free spot to place a lifted object."""


class CitoNotConverged(Namo2dError):
    """Pushing optimization failed to converge."""


class ExecutionDiverged(Namo2dError):
    """Executed pushing motion left the path still blocked."""


class StepLimitExceeded(Namo2dError):
    """Planner loop safety bound hit."""


# --- harness ---

class ParseError(Namo2dError):
    """Scene file syntax error."""

    def __init__(self, msg, line=None):
        loc = f" (line {line})" if line is not None else ""
        super().__init__(msg + loc)
        self.line = line


class ValidationError(Namo2dError):
    """Scene file violates a semantic invariant."""

    def __init__(self, field, msg):
        super().__init__(f"{field}: {msg}")
        self.field = field
