"""Ternary ({0, 1, erasure}) symbols and the componentwise operators used by
the sliding-window decoder.

Symbols are stored in uint8 arrays with 0, 1 as themselves and ERASE == 2
for the erasure.  All operators are vectorized and pure.
"""

from __future__ import annotations

import numpy as np

ERASE = 2

_CHAR = {0: "0", 1: "1", ERASE: "e"}
_SYM = {"0": 0, "1": 1, "e": ERASE}


def ternary(values) -> np.ndarray:
    """Coerce a sequence (or '01e' string) to a ternary uint8 array."""
    if isinstance(values, str):
        values = [_SYM[ch] for ch in values]
    arr = np.asarray(values, dtype=np.uint8)
    if arr.size and arr.max() > ERASE:
        raise ValueError("ternary symbols must be 0, 1 or 2 (erasure)")
    return arr


def to_str(block: np.ndarray) -> str:
    return "".join(_CHAR[int(v)] for v in np.asarray(block).ravel())


def box_plus(a, b) -> np.ndarray:
    """GF(2) addition extended to erasures: an erasure absorbs."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    out = a ^ b
    np.copyto(out, ERASE, where=(a == ERASE) | (b == ERASE))
    return out


def box_plus_many(blocks) -> np.ndarray:
    """Fold box_plus over a sequence of equal-length blocks."""
    blocks = list(blocks)
    acc = blocks[0].copy()
    for b in blocks[1:]:
        acc = box_plus(acc, b)
    return acc


def vote(blocks) -> np.ndarray:
    """Componentwise majority among non-erased symbols; ties (including
    all-erased) give an erasure."""
    stack = np.stack([np.asarray(b, dtype=np.uint8) for b in blocks])
    zeros = (stack == 0).sum(axis=0)
    ones = (stack == 1).sum(axis=0)
    out = np.full(stack.shape[1:], ERASE, dtype=np.uint8)
    np.copyto(out, 0, where=zeros > ones)
    np.copyto(out, 1, where=ones > zeros)
    return out


def random_fill(block: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Replace each erasure independently and uniformly by 0 or 1."""
    out = np.asarray(block, dtype=np.uint8).copy()
    mask = out == ERASE
    out[mask] = rng.integers(0, 2, size=int(mask.sum()), dtype=np.uint8)
    return out
