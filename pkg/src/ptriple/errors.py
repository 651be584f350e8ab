"""Error taxonomy.

Every failure mode that callers are expected to catch has its own class, and
every class has a distinct process exit code for the command-line interface.
Exit code 1 is reserved for unclassified errors, 2 for bad usage (argparse).
"""


class PTripleError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class NonInvertibleSeries(PTripleError):
    """Constant term is not a unit, so the series has no inverse."""

    exit_code = 10


class PrecisionExhausted(PTripleError):
    """A value lost all certified digits during computation."""

    exit_code = 11


class NotOrdinary(PTripleError):
    """a_p is divisible by p, so no unit root exists."""

    exit_code = 12


class UnsupportedCharacter(PTripleError):
    """Character is not trivial or quadratic, or its conductor is bad."""

    exit_code = 13


class DimensionNotReached(PTripleError):
    """Candidate pool exhausted before the space's dimension was spanned."""

    exit_code = 14


class MissingDimensionEntry(PTripleError):
    """No dimension-table row and rank stabilization was inconclusive."""

    exit_code = 15


class SplittingFailed(PTripleError):
    """Hecke polynomial does not split into distinct unit/non-unit roots."""

    exit_code = 16


class CapExceeded(PTripleError):
    """An iteration cap (ordinary-projector doubling, pool growth) was hit."""

    exit_code = 17


class SolveFailed(PTripleError):
    """Linear solve hit a non-divisible pivot at working precision."""

    exit_code = 18


class NotInSpan(PTripleError):
    """Residual after coordinate solve is nonzero at working precision."""

    exit_code = 19


class NoStabilization(PTripleError):
    """Projector power iteration failed to stabilize under the cap."""

    exit_code = 20


class MultiplicityAboveOne(PTripleError):
    """Eigenvalue is not simple: two smallest diagonal entries both vanish."""

    exit_code = 21


class NotAnEigenvalue(PTripleError):
    """A - sigma*I is invertible at working precision."""

    exit_code = 22


class DegenerateProjector(PTripleError):
    """Projector row pairs to zero against the eigenform's coordinates."""

    exit_code = 23


class NotDepleted(PTripleError):
    """Series has coefficients at indices divisible by p where none belong."""

    exit_code = 24


class UnbalancedTriple(PTripleError):
    """Weights violate k + l + m even or the balanced inequality."""

    exit_code = 25


class NonUnitEulerFactor(PTripleError):
    """An Euler factor is zero at working precision; nonvanishing uncertifiable."""

    exit_code = 26


class MissingPeriod(PTripleError):
    """No period fixture for the requested form and prime."""

    exit_code = 27


class ZeroDenominatorLValue(PTripleError):
    """Ratio or recovery denominator is zero at working precision."""

    exit_code = 28


class OddWeightSignAmbiguity(PTripleError):
    """Sign data required for an odd-weight construction is unavailable."""

    exit_code = 29


class PrefixMismatch(PTripleError):
    """Ingested coefficients disagree with the registered prefix."""

    exit_code = 30


class InsufficientCoefficients(PTripleError):
    """Fixture has fewer coefficients than the planner requires."""

    exit_code = 31


class PrecisionBelowRequested(PTripleError):
    """Certified output precision fell below what the run promised."""

    exit_code = 32
