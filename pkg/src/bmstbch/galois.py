"""Arithmetic in GF(2)[x] and GF(2^q), enough to build and decode BCH codes.

Binary polynomials are packed into Python ints (bit i = coefficient of x^i),
so ring operations are shift/xor games.  Field elements are ints in
[0, 2^q) in the polynomial basis; multiplication goes through log/antilog
tables indexed by powers of the primitive element alpha.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np


class FieldConstructionError(ValueError):
    """Raised when a requested polynomial cannot define GF(2^q)."""


# One canonical primitive polynomial per extension degree (coefficients of
# x^q..x^0 packed as an int).  All are verified primitive at table build.
PRIMITIVE_POLYS = {
    2: 0b111,                # x^2 + x + 1
    3: 0b1011,               # x^3 + x + 1
    4: 0b10011,              # x^4 + x + 1
    5: 0b100101,             # x^5 + x^2 + 1
    6: 0b1000011,            # x^6 + x + 1
    7: 0b10001001,           # x^7 + x^3 + 1
    8: 0b100011101,          # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,         # x^9 + x^4 + 1
    10: 0b10000001001,       # x^10 + x^3 + 1
    11: 0b100000000101,      # x^11 + x^2 + 1
    12: 0b1000001010011,     # x^12 + x^6 + x^4 + x + 1
    13: 0b10000000011011,    # x^13 + x^4 + x^3 + x + 1
    14: 0b100010001000011,   # x^14 + x^10 + x^6 + x + 1
    15: 0b1000000000000011,  # x^15 + x + 1
    16: 0b10001000000001011, # x^16 + x^12 + x^3 + x + 1
}


@dataclass(frozen=True)
class BinaryPolynomial:
    """Polynomial over GF(2), packed as an int (bit i = coeff of x^i).

    The zero polynomial has ``degree is None`` -- a sentinel, never a
    valid exponent.
    """

    bits: int

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[int]) -> "BinaryPolynomial":
        """Build from coefficients, lowest degree first."""
        bits = 0
        for i, c in enumerate(coeffs):
            if c & 1:
                bits |= 1 << i
        return cls(bits)

    @classmethod
    def from_exponents(cls, exponents: Iterable[int]) -> "BinaryPolynomial":
        bits = 0
        for e in exponents:
            bits ^= 1 << e
        return cls(bits)

    @property
    def degree(self) -> Optional[int]:
        if self.bits == 0:
            return None
        return self.bits.bit_length() - 1

    def coeffs(self) -> list[int]:
        """Coefficients lowest degree first; [] for the zero polynomial."""
        return [(self.bits >> i) & 1 for i in range(self.bits.bit_length())]

    def __add__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return BinaryPolynomial(self.bits ^ other.bits)

    __sub__ = __add__

    def __mul__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        a, b, acc = self.bits, other.bits, 0
        while b:
            if b & 1:
                acc ^= a
            a <<= 1
            b >>= 1
        return BinaryPolynomial(acc)

    def __divmod__(self, other: "BinaryPolynomial"):
        if other.bits == 0:
            raise ZeroDivisionError("division by the zero polynomial")
        q, r = 0, self.bits
        dl = other.bits.bit_length()
        while r.bit_length() >= dl:
            shift = r.bit_length() - dl
            q ^= 1 << shift
            r ^= other.bits << shift
        return BinaryPolynomial(q), BinaryPolynomial(r)

    def __mod__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return divmod(self, other)[1]

    def __floordiv__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return divmod(self, other)[0]

    def derivative(self) -> "BinaryPolynomial":
        # characteristic 2: even-degree terms vanish, odd ones drop a degree
        out = 0
        bits = self.bits >> 1
        i = 0
        while bits:
            if bits & 1 and i % 2 == 0:
                out |= 1 << i
            bits >>= 1
            i += 1
        return BinaryPolynomial(out)

    def evaluate(self, table: "FieldTable", element: int) -> int:
        """Evaluate at a GF(2^q) element via Horner's rule."""
        acc = 0
        for i in range(self.bits.bit_length() - 1, -1, -1):
            acc = table.mul(acc, element)
            if (self.bits >> i) & 1:
                acc ^= 1
        return acc

    def __str__(self) -> str:
        if self.bits == 0:
            return "0"
        terms = []
        for i in range(self.bits.bit_length() - 1, -1, -1):
            if (self.bits >> i) & 1:
                terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
        return " + ".join(terms)


class FieldTable:
    """GF(2^q) with log/antilog tables over a primitive polynomial.

    Immutable after construction; all element operations are pure functions
    on ints, safe to share across workers.
    """

    def __init__(self, q: int, primitive_polynomial: BinaryPolynomial):
        if not 2 <= q <= 16:
            raise FieldConstructionError(f"extension degree {q} outside [2, 16]")
        if primitive_polynomial.degree != q:
            raise FieldConstructionError(
                f"polynomial {primitive_polynomial} has degree "
                f"{primitive_polynomial.degree}, need {q}"
            )
        self.q = q
        self.primitive_polynomial = primitive_polynomial
        self.order = (1 << q) - 1  # size of the multiplicative group

        n = self.order
        # exp is doubled so products of two logs index without a mod
        exp = np.zeros(2 * n, dtype=np.int64)
        log = np.full(n + 1, -1, dtype=np.int64)
        poly = primitive_polynomial.bits
        x = 1
        for i in range(n):
            if log[x] != -1:
                raise FieldConstructionError(
                    f"{primitive_polynomial} is not primitive over GF(2): "
                    f"alpha has order {i}"
                )
            exp[i] = x
            log[x] = i
            x <<= 1
            if x >> q:
                x ^= poly
        if x != 1:
            # alpha^(2^q - 1) != 1: polynomial is not even irreducible
            raise FieldConstructionError(
                f"{primitive_polynomial} is not irreducible over GF(2)"
            )
        exp[n:] = exp[:n]
        self.exp = exp
        self.log = log
        self.exp.setflags(write=False)
        self.log.setflags(write=False)

    # -- element operations (ints in [0, 2^q)) --

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in GF(2^q)")
        return int(self.exp[self.order - self.log[a]])

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError("division by zero in GF(2^q)")
        if a == 0:
            return 0
        return int(self.exp[self.log[a] - self.log[b] + self.order])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e else 1
        return int(self.exp[(self.log[a] * e) % self.order])

    def alpha(self, power: int = 1) -> int:
        """alpha^power as an int."""
        return int(self.exp[power % self.order])

    def element(self, value: int) -> "FieldElement":
        return FieldElement(value, self)

    def elements(self) -> Iterable["FieldElement"]:
        return (FieldElement(v, self) for v in range(self.order + 1))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldTable)
            and self.q == other.q
            and self.primitive_polynomial == other.primitive_polynomial
        )

    def __hash__(self) -> int:
        return hash((self.q, self.primitive_polynomial.bits))

    def __repr__(self) -> str:
        return f"FieldTable(q={self.q}, poly={self.primitive_polynomial})"


def build_field(q: int, primitive_polynomial: Optional[BinaryPolynomial] = None) -> FieldTable:
    """Build GF(2^q); verifies the polynomial is primitive (alpha has full
    multiplicative order 2^q - 1).  Defaults to the built-in polynomial."""
    if primitive_polynomial is None:
        try:
            primitive_polynomial = BinaryPolynomial(PRIMITIVE_POLYS[q])
        except KeyError:
            raise FieldConstructionError(f"no built-in primitive polynomial for q={q}")
    return FieldTable(q, primitive_polynomial)


@dataclass(frozen=True)
class FieldElement:
    """An element of GF(2^q), bound to its FieldTable."""

    value: int
    table: FieldTable

    def _check(self, other: "FieldElement") -> None:
        if self.table != other.table:
            raise ValueError("operands belong to different fields")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.value ^ other.value, self.table)

    __sub__ = __add__

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.table.mul(self.value, other.value), self.table)

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.table.div(self.value, other.value), self.table)

    def __pow__(self, e: int) -> "FieldElement":
        return FieldElement(self.table.pow(self.value, e), self.table)

    def inverse(self) -> "FieldElement":
        return FieldElement(self.table.inv(self.value), self.table)

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        if self.value == 0:
            return "GF:0"
        return f"GF:a^{int(self.table.log[self.value])}"


class FieldPoly:
    """Polynomial with coefficients in GF(2^q), lowest degree first.

    Small helper used for minimal/generator polynomial construction and for
    cross-checking the decoder; the performance-critical decoding loops work
    on raw arrays instead.
    """

    def __init__(self, table: FieldTable, coeffs: Iterable[int]):
        self.table = table
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = c

    @property
    def degree(self) -> Optional[int]:
        return len(self.coeffs) - 1 if self.coeffs else None

    def __getitem__(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def __add__(self, other: "FieldPoly") -> "FieldPoly":
        m = max(len(self.coeffs), len(other.coeffs))
        return FieldPoly(self.table, [self[i] ^ other[i] for i in range(m)])

    __sub__ = __add__

    def __mul__(self, other: "FieldPoly") -> "FieldPoly":
        if not self.coeffs or not other.coeffs:
            return FieldPoly(self.table, [])
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] ^= self.table.mul(a, b)
        return FieldPoly(self.table, out)

    def scale(self, c: int) -> "FieldPoly":
        return FieldPoly(self.table, [self.table.mul(a, c) for a in self.coeffs])

    def __divmod__(self, other: "FieldPoly"):
        if not other.coeffs:
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coeffs)
        quo = [0] * max(len(rem) - len(other.coeffs) + 1, 0)
        dlead = self.table.inv(other.coeffs[-1])
        for shift in range(len(rem) - len(other.coeffs), -1, -1):
            c = self.table.mul(rem[shift + len(other.coeffs) - 1], dlead)
            if c == 0:
                continue
            quo[shift] = c
            for j, b in enumerate(other.coeffs):
                rem[shift + j] ^= self.table.mul(c, b)
        return FieldPoly(self.table, quo), FieldPoly(self.table, rem)

    def __mod__(self, other: "FieldPoly") -> "FieldPoly":
        return divmod(self, other)[1]

    def evaluate(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = self.table.mul(acc, x) ^ c
        return acc

    def derivative(self) -> "FieldPoly":
        return FieldPoly(
            self.table,
            [self.coeffs[i] if i % 2 == 1 else 0 for i in range(1, len(self.coeffs))],
        )

    def __repr__(self) -> str:
        return f"FieldPoly({self.coeffs})"


def minimal_polynomial(e: FieldElement) -> BinaryPolynomial:
    """Minimal polynomial over GF(2) of a nonzero element: the product of
    (x - c) over the conjugacy class {e, e^2, e^4, ...}."""
    if e.value == 0:
        raise ValueError("the zero element has no conjugacy class")
    table = e.table
    conjugates = []
    c = e.value
    while c not in conjugates:
        conjugates.append(c)
        c = table.mul(c, c)
    prod = FieldPoly(table, [1])
    for c in conjugates:
        prod = prod * FieldPoly(table, [c, 1])  # (x + c)
    for coeff in prod.coeffs:
        if coeff not in (0, 1):
            raise AssertionError("minimal polynomial has a coefficient outside GF(2)")
    return BinaryPolynomial.from_coeffs(prod.coeffs)
