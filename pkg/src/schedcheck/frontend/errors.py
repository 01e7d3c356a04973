from __future__ import annotations


class FrontendError(Exception):
    """Any problem with an MTL source program."""

    def __init__(self, message: str, pos=None):
        self.message = message
        self.pos = pos
        where = f"{pos.line}:{pos.col}: " if pos is not None else ""
        super().__init__(f"{where}{message}")


class MTLSyntaxError(FrontendError):
    pass


class UndeclaredIdentifier(FrontendError):
    pass


class DuplicateDeclaration(FrontendError):
    pass


class RecursionDetected(FrontendError):
    pass


class StatementBudgetExceeded(FrontendError):
    pass
