"""Tseitin gates and two's-complement bit-vector circuits.

Bit-vectors are lists of literals, least significant bit first.  Gates fold
constants and are hash-consed, so structurally equal sub-circuits share
their output literal.
"""

from __future__ import annotations

from .cnf import CnfFormula


class BitBlaster:
    def __init__(self, cnf: CnfFormula, width: int = 8):
        if width < 1:
            raise ValueError("bit width must be positive")
        self.cnf = cnf
        self.width = width
        self.T = cnf.true
        self.F = -cnf.true
        self._cache: dict = {}

    def _emit(self, clause):
        self.cnf.add(clause)

    # -- single-bit gates ---------------------------------------------------
    def and_(self, *lits: int) -> int:
        T, F = self.T, self.F
        seen = set()
        for x in lits:
            if x == F or -x in seen:
                return F
            if x != T:
                seen.add(x)
        if not seen:
            return T
        if len(seen) == 1:
            return next(iter(seen))
        key = ("and", frozenset(seen))
        out = self._cache.get(key)
        if out is None:
            out = self.cnf.new_var()
            for x in seen:
                self._emit([-out, x])
            self._emit([out] + [-x for x in seen])
            self._cache[key] = out
        return out

    def or_(self, *lits: int) -> int:
        return -self.and_(*(-x for x in lits))

    def xor(self, a: int, b: int) -> int:
        T, F = self.T, self.F
        if a == F:
            return b
        if b == F:
            return a
        if a == T:
            return -b
        if b == T:
            return -a
        if a == b:
            return F
        if a == -b:
            return T
        sign = 1
        if a < 0:
            a, sign = -a, -sign
        if b < 0:
            b, sign = -b, -sign
        key = ("xor", min(a, b), max(a, b))
        out = self._cache.get(key)
        if out is None:
            out = self.cnf.new_var()
            self._emit([-out, a, b])
            self._emit([-out, -a, -b])
            self._emit([out, -a, b])
            self._emit([out, a, -b])
            self._cache[key] = out
        return out * sign

    def mux(self, s: int, t: int, e: int) -> int:
        """``t`` if ``s`` else ``e``."""
        if s == self.T or t == e:
            return t
        if s == self.F:
            return e
        if t == self.T:
            return self.or_(s, e)
        if t == self.F:
            return self.and_(-s, e)
        if e == self.T:
            return self.or_(-s, t)
        if e == self.F:
            return self.and_(s, t)
        key = ("mux", s, t, e)
        out = self._cache.get(key)
        if out is None:
            out = self.cnf.new_var()
            self._emit([-s, -t, out])
            self._emit([-s, t, -out])
            self._emit([s, -e, out])
            self._emit([s, e, -out])
            self._cache[key] = out
        return out

    # -- bit-vectors --------------------------------------------------------
    def const(self, value: int, width: int | None = None) -> list[int]:
        w = width or self.width
        value &= (1 << w) - 1
        return [self.T if value >> i & 1 else self.F for i in range(w)]

    def fresh(self, name: str | None = None, width: int | None = None) -> list[int]:
        w = width or self.width
        return [self.cnf.new_var(f"{name}[{i}]" if name else None) for i in range(w)]

    def from_bool(self, lit: int) -> list[int]:
        return [lit] + [self.F] * (self.width - 1)

    def add(self, a, b, carry: int | None = None) -> list[int]:
        c = self.F if carry is None else carry
        out = []
        for x, y in zip(a, b):
            xy = self.xor(x, y)
            out.append(self.xor(xy, c))
            c = self.or_(self.and_(x, y), self.and_(c, xy))
        return out

    def bvnot(self, a) -> list[int]:
        return [-x for x in a]

    def neg(self, a) -> list[int]:
        return self.add(self.bvnot(a), self.const(0, len(a)), carry=self.T)

    def sub(self, a, b) -> list[int]:
        return self.add(a, self.bvnot(b), carry=self.T)

    def mul(self, a, b) -> list[int]:
        w = len(a)
        acc = self.const(0, w)
        for i in range(w):
            if b[i] == self.F:
                continue
            partial = [self.F] * i + [self.and_(a[j], b[i]) for j in range(w - i)]
            acc = self.add(acc, partial)
        return acc

    def mux_bv(self, s: int, t, e) -> list[int]:
        return [self.mux(s, x, y) for x, y in zip(t, e)]

    def eq(self, a, b) -> int:
        return self.and_(*(-self.xor(x, y) for x, y in zip(a, b)))

    def ult(self, a, b) -> int:
        lt = self.F
        for x, y in zip(a, b):
            # bit i decides unless equal, then fall back to lower bits
            lt = self.or_(self.and_(-x, y), self.and_(-self.xor(x, y), lt))
        return lt

    def slt(self, a, b) -> int:
        a = list(a[:-1]) + [-a[-1]]
        b = list(b[:-1]) + [-b[-1]]
        return self.ult(a, b)

    def truth(self, a) -> int:
        return self.or_(*a)
