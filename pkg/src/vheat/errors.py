"""Exception types raised by the solvers."""


class SolverError(Exception):
    """Base class for runtime failures of the time steppers."""


class CFLViolation(SolverError):
    """Raised under the strict CFL policy when lambda exceeds the stability bound."""


class NewtonDivergence(SolverError):
    """The nonlinear solve did not reach the residual tolerance within the iteration cap."""


class NonfiniteState(SolverError):
    """A time step produced NaN or infinite nodal values."""


class CoefficientBlowup(SolverError):
    """A transform evaluation left the representable range (v-scheme coefficient path)."""


class DegenerateNodeError(SolverError):
    """Initial data for the v-scheme hits a zero of the wave speed at a grid node."""
