"""Bounded verification of shared-memory concurrent programs.

Programs are written in MTL, a small C-like language with shared integer
variables, threads, spawn and join.  The default engine solves a
scheduling-free abstraction of the program and refines it with clauses
learned from infeasible event orders.
"""

from .driver import Config, Verdict, verify, verify_source
from .frontend import load

__all__ = ["Config", "Verdict", "load", "verify", "verify_source"]
__version__ = "0.1.0"
