"""Exception types shared across the package."""


class PolymodError(Exception):
    pass


class ParseError(PolymodError):
    """Malformed element, ideal or diagram text."""


class BadSymbol(ParseError):
    pass


class BadIdeal(ParseError):
    pass


class LabelViolation(BadSymbol):
    """Explicit node labels break the allowed dihedral ratios."""


class NotPrime(PolymodError):
    pass


class OddCharRequired(PolymodError):
    pass


class NoPair(PolymodError):
    pass


class NoEmbedding(PolymodError):
    pass


class BudgetExceeded(PolymodError):
    """Closure enumeration passed its element budget.

    Carries the partial element count so callers can report progress.
    """

    def __init__(self, partial_count: int, cap: int):
        super().__init__(f"element budget {cap} exceeded (saw {partial_count})")
        self.partial_count = partial_count
        self.cap = cap


class NotInvariant(PolymodError):
    pass


class NotCorankOne(PolymodError):
    pass


class NotCGroup(PolymodError):
    pass


class RelationFailure(PolymodError):
    pass


class Char2Unsupported(PolymodError):
    pass


class IsotropicRoot(PolymodError):
    pass


class UnsupportedFormula(PolymodError):
    pass


class HypothesisNotMet(PolymodError):
    pass


class DiscriminantPrime(PolymodError):
    pass


class NotApplicable(PolymodError):
    pass
