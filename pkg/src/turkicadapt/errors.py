"""Exception hierarchy shared across the package."""


class TurkicAdaptError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TurkicAdaptError, ValueError):
    """A document file is syntactically malformed or structurally wrong."""


class ValidationError(TurkicAdaptError, ValueError):
    """A value violates a documented invariant (range, uniqueness, shape)."""


class UnknownLanguageError(ValidationError, KeyError):
    """A language id is not present in the structure being queried."""

    def __str__(self) -> str:  # KeyError quotes its args; keep the message readable
        return ValueError.__str__(self)


class MissingPairError(ValidationError):
    """Component records are absent for one or more required language pairs."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        pairs = ", ".join(f"{s}->{t}" for s, t in self.missing)
        super().__init__(f"missing component records for pairs: {pairs}")


class InsufficientDataError(ValidationError):
    """Fewer observations than free parameters."""


class NonFiniteObjectiveError(TurkicAdaptError, ArithmeticError):
    """The fitting objective became NaN or infinite."""


class InfeasibleBudgetError(ValidationError):
    """The total budget cannot cover the per-language minima."""
