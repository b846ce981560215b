"""Exception hierarchy shared by every module of the package."""


class Level2Error(Exception):
    """Base class for all errors raised by this package."""


class RankError(Level2Error):
    """Generators do not span a full-rank lattice."""


class ContainmentError(Level2Error):
    """A lattice expected to be a sublattice is not contained in the other."""


class FormError(Level2Error):
    """A quadratic form is not positive definite."""


class AlgebraError(Level2Error):
    """Elements or lattices from different quaternion algebras were mixed."""


class DegenerateError(Level2Error):
    """A zero or otherwise degenerate object was passed where it is not allowed."""


class InputError(Level2Error):
    """Invalid user input (non-prime p, non-fundamental discriminant, ...)."""


class ConstructionError(Level2Error):
    """An order or algebra could not be built or failed validation."""


class InternalError(Level2Error):
    """An internal consistency check failed. This signals a bug."""


class IdealError(Level2Error):
    """A lattice does not have the ideal-theoretic property that was required."""


class WitnessError(Level2Error):
    """No element with the required property was found within the search bound."""


class SearchExhausted(Level2Error):
    """An unbounded search hit its cap."""


class EnumerationError(Level2Error):
    """Class enumeration did not close up."""


class MultiplicityError(Level2Error):
    """A joint eigenspace stayed more than one-dimensional."""


class ClassificationError(Level2Error):
    """An eigenvector could not be classified unambiguously."""


class AbsentError(Level2Error):
    """The requested eigenvector does not exist in the component."""


class TheoremViolation(Level2Error):
    """A count or identity that must hold unconditionally failed."""


class BootstrapError(Level2Error):
    """No (level, sign) candidate satisfied the functional equation test."""


class Indeterminate(Level2Error):
    """A ratio could not be formed because both sides vanish."""
