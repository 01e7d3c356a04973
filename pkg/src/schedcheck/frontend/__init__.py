"""Parsing, loop unwinding and normalization of MTL programs."""

from .ast import Program, format_program
from .errors import (DuplicateDeclaration, FrontendError, MTLSyntaxError, RecursionDetected,
                     StatementBudgetExceeded, UndeclaredIdentifier)
from .normalize import NormalizedProgram, NStmt, ThreadInstance, normalize
from .order import ProgramOrder, program_order
from .parser import parse, parse_file
from .unwind import inline_and_unwind


def load(source: str, unwind: int = 2, *, unwinding_assertions: bool = False) -> NormalizedProgram:
    """Parse, unwind and normalize MTL source in one step."""
    ast = inline_and_unwind(parse(source), unwind, unwinding_assertions=unwinding_assertions)
    return normalize(ast)


__all__ = [
    "DuplicateDeclaration", "FrontendError", "MTLSyntaxError", "NStmt", "NormalizedProgram",
    "Program", "ProgramOrder", "RecursionDetected", "StatementBudgetExceeded", "ThreadInstance",
    "UndeclaredIdentifier", "format_program", "inline_and_unwind", "load", "normalize", "parse",
    "parse_file", "program_order",
]
