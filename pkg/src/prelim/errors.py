"""Exception hierarchy. Everything derives from ``PrelimError`` (a ValueError)."""


class PrelimError(ValueError):
    pass


class EmptyAfterFiltering(PrelimError):
    pass


class TooSmall(PrelimError):
    pass


class LengthMismatch(PrelimError):
    pass


class InvalidCounts(PrelimError):
    pass


class InvalidHyperparameter(PrelimError):
    pass


class DimensionMismatch(PrelimError):
    pass


class DegenerateData(PrelimError):
    pass


class DegenerateTraining(PrelimError):
    pass


class InvalidAlpha(PrelimError):
    pass


class InvalidBudget(PrelimError):
    pass


class EmptySubset(PrelimError):
    pass


class NoOppositePair(PrelimError):
    pass


class TooFewPoints(PrelimError):
    pass


class UnknownSpec(PrelimError):
    pass
