"""Exception types shared across the package."""


class Plane15Error(Exception):
    """Base class for all errors raised by this package."""


class BadDimensions(Plane15Error):
    pass


class BadCharacter(Plane15Error):
    def __init__(self, row, col, char):
        super().__init__(f"bad character {char!r} at row {row}, column {col}")
        self.row, self.col, self.char = row, col, char


class InvariantViolation(Plane15Error):
    def __init__(self, findings):
        super().__init__("; ".join(str(f) for f in findings))
        self.findings = list(findings)


class Contradiction(Plane15Error):
    pass


class IncompleteAssignment(Plane15Error):
    pass


class EmptyClauseError(Plane15Error):
    pass


class ParseError(Plane15Error):
    def __init__(self, message, line=None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(message + where)
        self.line = line


class AmbiguousExtension(Plane15Error):
    pass


class NoRenormalization(Plane15Error):
    pass


class CallbackContract(Plane15Error):
    pass


class ResourceLimit(Plane15Error):
    pass


class CrossCheckMismatch(Plane15Error):
    pass


class SinkFailure(Plane15Error):
    pass
