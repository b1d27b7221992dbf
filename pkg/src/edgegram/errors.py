"""Exception types raised by the library.

Contract violations (bad shapes, invalid indices) and numerical
precondition failures (unstable system, singular Gramian) get distinct
classes so callers can react to them separately; everything derives from
:class:`EdgegramError`.
"""


class EdgegramError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(EdgegramError):
    """Matrix shapes are inconsistent with each other or with n/m."""


class NonFinite(EdgegramError):
    """An input matrix contains NaN or infinite entries."""


class IndexOutOfRange(EdgegramError):
    """A node, input or edge index is outside 1..n (or 1..m)."""


class InvalidInput(EdgegramError):
    """An argument value is outside its documented domain."""


class UnstableSystem(EdgegramError):
    """Operation requires rho(A) < 1 and the system is not stable."""


class UnstableAbsSystem(EdgegramError):
    """Operation requires rho(|A|) < 1 and the absolute system is not stable."""


class SingularGramian(EdgegramError):
    """Gramian is singular at this horizon; inverse-based metrics undefined.

    Signals that the system is (numerically) uncontrollable at the
    requested horizon.
    """


class AsymmetricP(EdgegramError):
    """Weight matrix P fails the symmetry tolerance."""


class RepeatedEigenvalue(EdgegramError):
    """Eigenvalue gradient requested for a (numerically) repeated eigenvalue."""


class AlphaUndefined(EdgegramError):
    """The per-edge constant alpha has a nonpositive denominator for w."""


class PreconditionViolated(EdgegramError):
    """A named spectral-radius precondition of a bound does not hold."""


class InvalidJunction(EdgegramError):
    """Stem-bud junction index outside 0..n-1."""


class ZeroWeight(EdgegramError):
    """A structurally required stem-bud weight is zero."""


class EmptyCandidateSet(EdgegramError):
    """Edge filters removed every ranking candidate."""


class FitDegenerate(EdgegramError):
    """Too few distinct data abscissae to fit the global-estimate curve."""


class DegenerateGraph(EdgegramError):
    """Random graph generation repeatedly produced an unusable topology."""


class NotPD(EdgegramError):
    """Matrix is not (numerically) symmetric positive definite."""


class LambdaTildeTooSmall(EdgegramError):
    """Supplied eigenvalue overestimate is below the actual largest eigenvalue."""


class ZeroVector(EdgegramError):
    """A vector argument that must be nonzero is zero."""


class FileFormatError(EdgegramError):
    """A matrix or system file is malformed (ragged rows, missing fields)."""
