"""Exception types shared across the library."""


class QuasiheatError(Exception):
    """Base class for all library-specific errors."""


class DomainError(QuasiheatError, ValueError):
    """An argument lies outside the domain an operation supports."""


class NonIntegrableTail(QuasiheatError):
    """The reaction term grows too slowly for its lifetime integral to converge."""


class BracketFailure(QuasiheatError):
    """No sign-change bracket could be established for a root search."""


class NoConvergence(QuasiheatError):
    """An extrapolated limit did not settle within tolerance."""


class InvalidQ(QuasiheatError, ValueError):
    """A small-amplitude exponent below 1 was supplied; such values cannot occur."""


class StepFailure(QuasiheatError):
    """The adaptive ODE integrator could not meet its tolerance."""


class NotConverged(QuasiheatError):
    """A far-field limit extraction failed; the integration range is too short."""


class UnboundedSupremum(QuasiheatError):
    """A supremum that should be uniformly bounded keeps growing under refinement."""


class OutOfGrid(QuasiheatError):
    """A query point lies beyond the radial range a profile was solved on."""


class SingularPoint(QuasiheatError):
    """An expression of the form f(W)F(W) underflowed at the evaluation point."""


class SmallnessViolated(QuasiheatError):
    """A comparison-solution amplitude exceeds its smallness threshold."""


class TailUnknown(QuasiheatError):
    """A radial field has a non-negligible tail but no closed-form extension."""


class GridTooCoarse(QuasiheatError):
    """Refining the spatial grid changed the verdict of an evolution run."""


class ConfigError(QuasiheatError, ValueError):
    """A run configuration is inconsistent or incomplete."""


class InvalidBracket(QuasiheatError):
    """The endpoints handed to the amplitude bisection do not classify as required."""


class SandwichViolated(QuasiheatError):
    """An evolved solution escaped its comparison-solution envelope."""
