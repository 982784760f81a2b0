"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class HyperstabError(Exception):
    """Base class for every error raised by the package."""


class ZeroPolynomial(HyperstabError):
    pass


class ConstantPolynomial(HyperstabError):
    pass


class ConstantDerivative(HyperstabError):
    pass


class NotNormalized(HyperstabError):
    pass


class DegreeTooLarge(HyperstabError):
    pass


class Unrepresentable(HyperstabError):
    pass


class ShapeMismatch(HyperstabError):
    pass


class NotSquare(HyperstabError):
    pass


class NotMonic(HyperstabError):
    pass


class HypothesisViolated(HyperstabError):
    """A structural hypothesis of a theorem-backed route does not hold.

    ``which`` names the failing hypothesis so callers can report it.
    """

    def __init__(self, which: str, detail: str = ""):
        self.which = which
        super().__init__(f"{which}: {detail}" if detail else which)


class PreconditionViolated(HyperstabError):
    pass


class VariantPreconditionViolated(PreconditionViolated):
    pass


class NotBlockTriangular(HyperstabError):
    pass


class NoApplicableBound(HyperstabError):
    pass


class KappaTooSmall(HyperstabError):
    pass


class IndexOutOfRange(HyperstabError):
    pass


class PointOutsideD(HyperstabError):
    pass


class NoRootFound(HyperstabError):
    pass


class BoundarySpecialization(HyperstabError):
    pass


class SizeCapExceeded(HyperstabError):
    pass


class SchemaError(HyperstabError):
    """Input document failed validation; ``pointer`` is a JSON pointer."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        self.message = message
        super().__init__(f"{pointer or '/'}: {message}")


class NotStable(PreconditionViolated):
    """A polynomial required to be stable has a zero in the region."""
