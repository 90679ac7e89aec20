"""Exception types shared across the toolkit."""


class CrystalflowError(Exception):
    """Base class for all toolkit errors."""


# --- anisotropy construction ---

class NonConvexError(CrystalflowError):
    """Wulff vertices do not form a strictly convex polygon."""


class OriginOutsideError(CrystalflowError):
    """The origin is not strictly inside the Wulff polygon."""


class DegenerateEdgeError(CrystalflowError):
    """A Wulff edge has (numerically) zero length."""


# --- polygons ---

class NotSimpleError(CrystalflowError):
    """Polygon boundary self-intersects."""


class NonAdmissibleDirectionError(CrystalflowError):
    """An edge normal does not match any admissible direction (strict mode)."""


class AdjacencyViolationError(CrystalflowError):
    """Consecutive facet directions are not adjacent in the normal fan."""


class ZeroLengthError(CrystalflowError):
    """A facet has non-positive length."""


class ParallelAdjacentFacetsError(CrystalflowError):
    """Adjacent facets are (numerically) parallel; corner systems are singular."""


class StiffnessFailureError(CrystalflowError):
    """The ODE integrator could not continue (step size underflow)."""


# --- exact solutions ---

class PastExtinctionError(CrystalflowError):
    """Evaluation time is beyond the extinction time of the solution."""


class EmptyFacetError(CrystalflowError):
    """Facet interval is empty (b <= a)."""


# --- facet calculus ---

class UnlabeledSegmentError(CrystalflowError):
    """A boundary segment has no +/- label."""


class ZeroAreaError(CrystalflowError):
    """Region has non-positive area."""


class CandidateNotContainedError(CrystalflowError):
    """A candidate subset is not contained in the reference facet."""


class BadRadiiError(CrystalflowError):
    """Radii violate 0 < r < R (or r > 0)."""


# --- level sets ---

class EmptySetError(CrystalflowError):
    """Operation requires a nonempty evolving set."""


class TouchedBoundaryError(CrystalflowError):
    """Evolving set reached the computational-box margin."""


class VanishedError(CrystalflowError):
    """Evolving set became empty during a step."""
