"""Exception hierarchy shared across the package."""


class MedlabError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class InputFormatError(MedlabError):
    """Malformed input file or payload (CLI exit code 2)."""


class CapExceeded(MedlabError):
    """A size cap (points, dimension, group order) was exceeded."""


class NotMedianClosed(MedlabError):
    """A point set is not closed under coordinatewise majority."""


class NotReduced(MedlabError):
    """Operation requires a reduced algebra (no constant or duplicate coordinates)."""


class NotConvex(MedlabError):
    """Operation requires a convex subset."""


class EmptySubsetError(MedlabError):
    """Operation requires a non-empty subset."""


class NotAMorphism(MedlabError):
    """A point map does not commute with the median operators."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class AxiomViolation(MedlabError):
    """A ternary table failed one of the median axioms."""

    def __init__(self, violation):
        super().__init__(f"{violation.axiom} fails at {violation.witness}")
        self.violation = violation


class NotATreeError(MedlabError):
    """Edge list does not describe a tree."""


class OutOfRangeError(MedlabError):
    """Numeric argument outside its documented range."""


class TooLargeError(MedlabError):
    """Instance too large for a brute-force operation."""


class SameWallError(MedlabError):
    """Transversality is defined for distinct walls only."""


class NotDisjointError(MedlabError):
    """Separation requires disjoint subsets."""


class NoSeparatorError(MedlabError):
    """No separating half-space exists for inputs that guarantee one (internal consistency failure)."""


class InvalidAutomorphism(MedlabError):
    """A permutation is not a median automorphism."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotBalancedInput(MedlabError):
    """classify_balanced requires an exactly balanced measure."""


class UnresolvedSearch(MedlabError):
    """No iteration start produced a verified measure; existence is not refuted."""


class InternalCheckError(MedlabError):
    """A postcondition that should hold by theory failed; treat as a bug or falsification event."""
