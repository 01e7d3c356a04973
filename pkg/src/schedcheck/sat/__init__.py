from .dimacs import DimacsError, format_dimacs, parse_dimacs, read_dimacs, solve_external, write_dimacs
from .solver import Sat, Solver, Unsat, check_model

__all__ = ["DimacsError", "Sat", "Solver", "Unsat", "check_model", "format_dimacs", "parse_dimacs",
           "read_dimacs", "solve_external", "write_dimacs"]
