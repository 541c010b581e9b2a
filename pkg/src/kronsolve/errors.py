"""Exception types shared across the solver.

Errors split into two families: *value errors* that indicate a misuse of an
operation (NotMonic, DuplicateNode, ...) and *unlucky-run signals* that the
solver catches to trigger a resample (NotCoprime, JacobianNonInvertible,
ShapeViolation, ...).  The latter all derive from UnluckyRun so the retry
loop can catch them uniformly.
"""


class KronError(Exception):
    """Base class for all package errors."""


class NonUnit(KronError):
    """Inversion of a non-unit ring element; carries a witness where known."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class Unsupported(KronError):
    """Operation not defined on this ring."""


class BadPrime(KronError):
    """Reduction mod p hit a denominator divisible by p."""


class FieldTooSmall(KronError):
    """Requested sample-set size exceeds the field cardinality."""

    def __init__(self, needed, available):
        super().__init__(f"need a sample set of size {needed}, field has {available} elements")
        self.needed = needed
        self.available = available


class NotMonic(KronError):
    """Division by a non-monic polynomial."""


class DuplicateNode(KronError):
    """Interpolation nodes are not pairwise distinct."""


class NonUnitConstantTerm(KronError):
    """Series inversion with a non-invertible constant term."""


class ExprSyntaxError(KronError):
    """Expression parse failure with source position."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnknownVariable(ExprSyntaxError):
    pass


class SingularMatrix(KronError):
    """Linear change of variables is not invertible."""


class TooLarge(KronError):
    """Brute-force enumeration exceeds the desk-scale guard."""


class NoReconstruction(KronError):
    """No fraction within the height bound matches the residue."""


# ---------------------------------------------------------------------------
# Unlucky-run signals: caught by the solve loop, answered with fresh randomness.


class UnluckyRun(KronError):
    """A randomized step hit a degenerate configuration."""


class NotCoprime(UnluckyRun):
    """Modular inverse failed; witness is the offending gcd."""

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


class DegenerateFiber(UnluckyRun):
    """Initial fiber collapsed (zero polynomial or degree zero)."""

    def __init__(self, message, degree_zero=False):
        super().__init__(message)
        self.degree_zero = degree_zero


class JacobianNonInvertible(UnluckyRun):
    """Specialized Jacobian determinant not invertible modulo the fiber."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class UnluckyEvaluationPoint(UnluckyRun):
    """Local resampling budget for evaluation nodes exhausted."""


class ZeroConstantTerm(UnluckyRun):
    """Projection of a polynomial vanishing on a curve component."""


class ShapeViolation(UnluckyRun):
    """A dynamic-evaluation branch gcd is not linear in Y."""


class CoercionFailed(UnluckyRun):
    """Extension-field value expected to lie in the base field does not."""


class DegreeCollapse(KronError):
    """Next minimal polynomial has degree zero: the slice is empty."""


class EmptyVariety(KronError):
    """The system has no solutions off the excluded hypersurface."""


class RetriesExhausted(KronError):
    """Retry budget spent; carries the last failure cause."""

    def __init__(self, message, cause=None):
        super().__init__(message)
        self.cause = cause
