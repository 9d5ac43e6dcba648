class MigImpactError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(MigImpactError, ValueError):
    """Input data broke a rule. Carries the source name, line and rule when known."""

    def __init__(self, message: str, *, source: str | None = None, line: int | None = None, rule: str | None = None):
        self.message = message
        self.source = source
        self.line = line
        self.rule = rule
        super().__init__(str(self))

    def __str__(self) -> str:
        where = ""
        if self.source is not None:
            where = self.source if self.line is None else f"{self.source}:{self.line}"
            where += ": "
        rule = f" [rule: {self.rule}]" if self.rule else ""
        return f"{where}{self.message}{rule}"


class UndefinedIndexError(MigImpactError, ValueError):
    """An index has no defined value for this input, e.g. effectiveness with no migrants."""


class DegenerateSpreadError(MigImpactError, ValueError):
    """All values identical, so a standardisation has no scale."""


class DegenerateDesignError(MigImpactError, ValueError):
    """Regression predictor has no variation."""
