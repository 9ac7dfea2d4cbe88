"""Exception types shared by all modules.

Each error carries an exit code so the command line front end can map
failures onto its documented process status without a lookup table.
"""


class HeckeError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 2


class InvalidParameter(HeckeError, ValueError):
    """A parameter is outside its admissible set (q < 3, identity matrix, ...)."""


class OutOfDomain(HeckeError, ValueError):
    """A point lies outside the domain of the requested map."""


class NoInterval(OutOfDomain):
    """A point is not contained in any partition interval."""


class UndefinedStep(OutOfDomain):
    """A map step is undefined at this point (division by zero)."""


class InvalidCode(HeckeError, ValueError):
    """A digit sequence violates the admissibility rules."""


class NotConvergent(InvalidCode):
    """Evaluation requested for a code without a convergence guarantee."""


class CuspGeodesic(OutOfDomain):
    """A geodesic endpoint has a finite expansion and runs into the cusp."""


class OffGeodesic(OutOfDomain):
    """A point that should lie on a geodesic does not."""


class VerticalGeodesic(OutOfDomain):
    """The tangent direction is vertical, endpoint coordinates degenerate."""


class TracerBudget(HeckeError, RuntimeError):
    """The geometric tracer did not find a return within its crossing budget."""

    exit_code = 3


class InternalConsistency(HeckeError, RuntimeError):
    """A computed object failed one of its own invariants."""

    exit_code = 3


class Singularity(OutOfDomain):
    """A density is evaluated on its polar set (uv = 1)."""
