"""Bit-blasted SSA encoding of normalized MTL programs."""

from .bitblast import BitBlaster
from .cnf import ABSTRACTION, COMPONENTS, CnfFormula, symbol_table
from .encode import (DEFAULT_WIDTH, EncodedProgram, EncodingError, Event, Link, bv_value, decode,
                     encode, encode_abstraction, encode_error, encode_scheduling, lit_value,
                     ssa_transform)

__all__ = [
    "ABSTRACTION", "BitBlaster", "COMPONENTS", "CnfFormula", "DEFAULT_WIDTH", "EncodedProgram",
    "EncodingError", "Event", "Link", "bv_value", "decode", "encode", "encode_abstraction",
    "encode_error", "encode_scheduling", "lit_value", "ssa_transform", "symbol_table",
]
