class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class FormulaParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class InvariantViolation(AssertionError):
    """A construction that must always succeed produced an invalid object."""


class EnumerationTimeout(RuntimeError):
    pass
