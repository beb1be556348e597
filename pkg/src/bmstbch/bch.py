"""Construction, systematic encoding and bounded-distance errors-and-erasures
decoding of (possibly shortened) binary BCH codes.

A word is decoded successfully whenever 2*errors + erasures < dmin; outside
that radius the decoder may miscorrect (return a different valid codeword)
or fail, and failures are ordinary outcomes, not exceptions.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .galois import BinaryPolynomial, FieldTable, build_field, minimal_polynomial
from .ternary import ERASE


class BchConstructionError(ValueError):
    """Raised for parameter sets that do not yield a usable code."""


@dataclass(frozen=True)
class DecodeOutcome:
    success: bool
    codeword: Optional[np.ndarray]  # uint8[n], present iff success


class BchCode:
    """A binary BCH [n, k, dmin] code, shortened from the length 2^q - 1
    parent by dropping the leading (highest-degree) information positions.

    Encoding is systematic: information bits occupy positions n-k..n-1 and
    the generator-polynomial remainder fills positions 0..n-k-1.
    """

    def __init__(self, q: int, dmin: int, shorten_by: int = 0,
                 field: Optional[FieldTable] = None):
        if dmin % 2 == 0:
            raise BchConstructionError("designed distance must be odd")
        if dmin < 3:
            raise BchConstructionError("designed distance must be at least 3")
        field = field or build_field(q)
        parent_n = field.order

        generator = BinaryPolynomial(1)
        seen: set[int] = set()
        for power in range(1, dmin):
            e = field.alpha(power)
            if e in seen:
                continue
            mp = minimal_polynomial(field.element(e))
            # track the whole conjugacy class so the lcm never repeats a factor
            c = e
            while c not in seen:
                seen.add(c)
                c = field.mul(c, c)
            generator = generator * mp

        parent_k = parent_n - generator.degree
        if shorten_by < 0 or parent_k - shorten_by <= 0:
            raise BchConstructionError(
                f"shortening by {shorten_by} leaves no information bits "
                f"(parent k = {parent_k})"
            )

        self.q = q
        self.dmin = dmin
        self.shorten_by = shorten_by
        self.field = field
        self.generator = generator
        self.parent_n = parent_n
        self.parent_k = parent_k
        self.n = parent_n - shorten_by
        self.k = parent_k - shorten_by
        self.t = (dmin - 1) // 2

        # parity of x^(n-k+j) mod g, one row per information position
        nk = self.n - self.k
        rows = np.zeros((self.k, nk), dtype=np.uint8)
        xnk = BinaryPolynomial(1 << nk)
        shifted = xnk
        for j in range(self.k):
            rem = (shifted % generator).bits
            for b in range(nk):
                rows[j, b] = (rem >> b) & 1
            shifted = BinaryPolynomial(shifted.bits << 1)
        self._parity_rows = rows
        self._exp = field.exp
        self._log = field.log

    # -- identity ------------------------------------------------------

    @property
    def params(self) -> tuple[int, int, int]:
        return (self.n, self.k, self.dmin)

    def construction_hash(self) -> str:
        h = hashlib.sha256()
        h.update(
            f"q={self.q};poly={self.field.primitive_polynomial.bits};"
            f"dmin={self.dmin};shorten={self.shorten_by};"
            f"gen={self.generator.bits}".encode()
        )
        return h.hexdigest()[:16]

    def __repr__(self) -> str:
        return f"BchCode[{self.n},{self.k},{self.dmin}]"

    # -- encoding ------------------------------------------------------

    @property
    def systematic(self) -> slice:
        """Positions of the information bits inside a codeword."""
        return slice(self.n - self.k, self.n)

    def encode(self, info: np.ndarray) -> np.ndarray:
        """Systematically encode one length-k information word."""
        info = np.asarray(info, dtype=np.uint8)
        if info.shape != (self.k,):
            raise ValueError(f"information word must have length {self.k}")
        return self.encode_block(info[None, :])[0]

    def encode_block(self, info: np.ndarray) -> np.ndarray:
        """Encode a batch of information words, shape (B, k) -> (B, n)."""
        info = np.asarray(info, dtype=np.uint8)
        if info.ndim != 2 or info.shape[1] != self.k:
            raise ValueError(f"expected shape (B, {self.k})")
        parity = (info.astype(np.int64) @ self._parity_rows.astype(np.int64)) & 1
        out = np.empty((info.shape[0], self.n), dtype=np.uint8)
        out[:, : self.n - self.k] = parity
        out[:, self.n - self.k:] = info
        return out

    def is_codeword(self, word: np.ndarray) -> bool:
        word = np.asarray(word, dtype=np.uint8)
        if word.shape != (self.n,):
            return False
        for r in range(1, self.dmin):
            acc = 0
            for pos in np.nonzero(word)[0]:
                acc ^= int(self._exp[(r * int(pos)) % self.field.order])
            if acc:
                return False
        return True

    # -- decoding ------------------------------------------------------

    def decode_ee(self, received: np.ndarray) -> DecodeOutcome:
        """Bounded-distance errors-and-erasures decoding of a ternary word."""
        received = np.asarray(received, dtype=np.uint8)
        if received.shape != (self.n,):
            raise ValueError(f"received word must have length {self.n}")
        erase = (received == ERASE).astype(np.uint8)
        bits = np.where(received == 1, 1, 0).astype(np.uint8)
        out = np.empty(self.n, dtype=np.uint8)
        ok = kernels.decode_ee_kernel(
            bits, erase, self.n, self.dmin, self._exp, self._log,
            self.field.order, out,
        )
        if ok == kernels.SUCCESS:
            return DecodeOutcome(True, out)
        return DecodeOutcome(False, None)

    def decode_block(self, received: np.ndarray):
        """Decode (B, n) ternary words; returns (codewords, success mask)."""
        received = np.asarray(received, dtype=np.uint8)
        if received.ndim != 2 or received.shape[1] != self.n:
            raise ValueError(f"expected shape (B, {self.n})")
        erase = (received == ERASE).astype(np.uint8)
        bits = np.where(received == 1, 1, 0).astype(np.uint8)
        out = np.zeros_like(bits)
        status = np.zeros(received.shape[0], dtype=np.uint8)
        kernels.decode_block_kernel(
            bits, erase, self.n, self.dmin, self._exp, self._log,
            self.field.order, out, status,
        )
        return out, status.astype(bool)


def construct_bch(q: int, dmin: int, shorten_by: int = 0) -> BchCode:
    """Build a BCH code over GF(2^q) with the given designed distance,
    shortened by dropping leading information positions."""
    return BchCode(q, dmin, shorten_by)


def bch_from_params(n: int, k: int, dmin: int) -> BchCode:
    """Resolve an [n, k, dmin] triple to a shortened BCH construction.

    Tries every extension degree whose parent is long enough (stated
    parameters sometimes come from a larger field than the minimal one) and
    raises if none matches -- inconsistent triples are flagged rather than
    silently patched.
    """
    attempts = []
    for q in range(3, 17):
        parent_n = (1 << q) - 1
        if parent_n < n:
            continue
        shorten = parent_n - n
        try:
            code = BchCode(q, dmin, shorten)
        except BchConstructionError:
            continue
        if code.k == k:
            return code
        attempts.append(f"GF(2^{q}) parent [{parent_n},{code.parent_k},{dmin}] "
                        f"gives k={code.k}")
    detail = "; ".join(attempts) if attempts else "no parent long enough"
    raise BchConstructionError(f"[{n},{k},{dmin}] is inconsistent: {detail}")
