"""Compiled inner loops for bounded-distance errors-and-erasures decoding.

Everything here works on raw arrays (bits, erasure masks, field log/antilog
tables) so numba can compile it; the object-facing wrappers live in bch.py.
The decode pipeline is: syndromes of the zero-filled word, erasure-modified
(Forney) syndromes, Berlekamp-Massey for the error locator, combination with
the erasure locator, Chien root search over the surviving positions, Forney
magnitudes, and a final re-syndroming of the corrected word.  Any
verification miss returns a failure.
"""

from __future__ import annotations

import numpy as np
from numba import njit

FAIL = 0
SUCCESS = 1


@njit(cache=True)
def decode_ee_kernel(bits, erase, n, dmin, exp, log, order, out):
    """Decode one word in place.

    bits   : uint8[n], received word with erasures already filled with 0
    erase  : uint8[n], 1 where the symbol was erased
    out    : uint8[n], receives the codeword on success
    returns SUCCESS or FAIL
    """
    two_t = dmin - 1

    rho = 0
    for pos in range(n):
        if erase[pos]:
            rho += 1
    if rho >= dmin:
        return FAIL

    # Syndromes S_r = word(alpha^r), r = 1..dmin-1, on the zero-filled word.
    synd = np.zeros(two_t, dtype=np.int64)
    for pos in range(n):
        if bits[pos]:
            for r in range(1, two_t + 1):
                synd[r - 1] ^= exp[(r * pos) % order]

    all_zero = True
    for r in range(two_t):
        if synd[r] != 0:
            all_zero = False
            break
    if all_zero:
        # zero-filled word is itself a codeword; with < dmin erasures it is
        # the unique codeword matching every unerased position
        for pos in range(n):
            out[pos] = bits[pos]
        return SUCCESS

    # Erasure-modified syndromes: each pass knocks one erasure's
    # contribution out of the sequence and shortens it by one.
    tseq = synd.copy()
    tlen = two_t
    for pos in range(n):
        if erase[pos]:
            x = exp[pos]
            for idx in range(tlen - 1):
                if tseq[idx] == 0:
                    tseq[idx] = tseq[idx + 1]
                else:
                    tseq[idx] = exp[log[tseq[idx]] + log[x]] ^ tseq[idx + 1]
            tlen -= 1

    # Berlekamp-Massey on the modified sequence -> error locator.
    width = two_t + 1
    lam = np.zeros(width, dtype=np.int64)
    old = np.zeros(width, dtype=np.int64)
    tmp = np.zeros(width, dtype=np.int64)
    lam[0] = 1
    old[0] = 1
    lam_len = 1
    old_len = 1
    for step in range(tlen):
        # old <- x * old
        for idx in range(old_len, 0, -1):
            old[idx] = old[idx - 1]
        old[0] = 0
        old_len += 1

        delta = np.int64(0)
        top = step if step < lam_len - 1 else lam_len - 1
        for idx in range(top + 1):
            a = lam[idx]
            b = tseq[step - idx]
            if a != 0 and b != 0:
                delta ^= exp[log[a] + log[b]]

        if delta != 0:
            dlog = log[delta]
            if old_len > lam_len:
                for idx in range(old_len):
                    v = old[idx]
                    tmp[idx] = exp[log[v] + dlog] if v != 0 else 0
                inv_log = order - dlog
                for idx in range(lam_len):
                    v = lam[idx]
                    old[idx] = exp[log[v] + inv_log] if v != 0 else 0
                for idx in range(lam_len, old_len):
                    old[idx] = 0
                t = lam_len
                lam_len = old_len
                old_len = t
                for idx in range(lam_len):
                    lam[idx] = tmp[idx]
                for idx in range(lam_len, width):
                    lam[idx] = 0
            for idx in range(old_len):
                v = old[idx]
                if v != 0:
                    lam[idx] ^= exp[log[v] + dlog]

    # Errata locator: error locator times the erasure locator (1 + alpha^pos x).
    psi = np.zeros(width, dtype=np.int64)
    for idx in range(lam_len):
        psi[idx] = lam[idx]
    psi_len = lam_len
    for pos in range(n):
        if erase[pos]:
            xlog = log[exp[pos]]
            for idx in range(psi_len - 1, -1, -1):
                v = psi[idx]
                if v != 0:
                    psi[idx + 1] ^= exp[log[v] + xlog]
            psi_len += 1

    deg_psi = 0
    for idx in range(width - 1, -1, -1):
        if psi[idx] != 0:
            deg_psi = idx
            break

    # Chien search restricted to the positions that survive shortening.
    roots = np.zeros(n, dtype=np.uint8)
    num_roots = 0
    for pos in range(n):
        xinv = exp[(order - pos) % order]
        acc = psi[deg_psi]
        for idx in range(deg_psi - 1, -1, -1):
            if acc != 0:
                acc = exp[log[acc] + log[xinv]]
            acc ^= psi[idx]
        if acc == 0:
            roots[pos] = 1
            num_roots += 1
    if num_roots != deg_psi:
        return FAIL

    # Forney magnitudes: omega = S(x) psi(x) mod x^(dmin-1).
    omega = np.zeros(two_t, dtype=np.int64)
    for d in range(two_t):
        acc = np.int64(0)
        for a in range(d + 1):
            s = synd[a]
            p = psi[d - a] if d - a <= deg_psi else 0
            if s != 0 and p != 0:
                acc ^= exp[log[s] + log[p]]
        omega[d] = acc
    # formal derivative of psi (characteristic 2)
    dpsi = np.zeros(width, dtype=np.int64)
    for idx in range(1, deg_psi + 1):
        if idx % 2 == 1:
            dpsi[idx - 1] = psi[idx]

    for pos in range(n):
        if not roots[pos]:
            continue
        xinv = exp[(order - pos) % order]
        num = np.int64(0)
        for idx in range(two_t - 1, -1, -1):
            if num != 0:
                num = exp[log[num] + log[xinv]]
            num ^= omega[idx]
        den = np.int64(0)
        for idx in range(width - 1, -1, -1):
            if den != 0:
                den = exp[log[den] + log[xinv]]
            den ^= dpsi[idx]
        if den == 0:
            return FAIL
        mag = exp[log[num] + (order - log[den])] if num != 0 else 0
        if mag > 1:
            return FAIL  # not a GF(2) correction
        if not erase[pos] and mag != 1:
            return FAIL  # located error with zero magnitude
        bitpos = bits[pos] ^ mag
        out[pos] = bitpos
    for pos in range(n):
        if not roots[pos]:
            out[pos] = bits[pos]

    # Re-syndrome the corrected word; any residue means the candidate is
    # not a codeword.
    for r in range(1, two_t + 1):
        acc = np.int64(0)
        for pos in range(n):
            if out[pos]:
                acc ^= exp[(r * pos) % order]
        if acc != 0:
            return FAIL
    return SUCCESS


@njit(cache=True)
def decode_block_kernel(bits2d, erase2d, n, dmin, exp, log, order, out2d, status):
    """Decode a batch of words independently (the B-fold of one layer)."""
    for w in range(bits2d.shape[0]):
        status[w] = decode_ee_kernel(
            bits2d[w], erase2d[w], n, dmin, exp, log, order, out2d[w]
        )


@njit(cache=True)
def mu_lambda_kernel(err_pos, era_pos, n, dmin, exp, log, order):
    """Decode random weight-(i, j) patterns around the zero codeword.

    err_pos : int32[S, i] error positions per trial
    era_pos : int32[S, j] erasure positions per trial
    Returns (weight_sum, failures, miscorrections): the Hamming weight of the
    output codeword summed over successful decodes, the failure count, and
    the number of successes with a nonzero output.
    """
    trials = err_pos.shape[0]
    bits = np.zeros(n, dtype=np.uint8)
    erase = np.zeros(n, dtype=np.uint8)
    out = np.zeros(n, dtype=np.uint8)
    weight_sum = 0
    failures = 0
    miscorrections = 0
    for s in range(trials):
        for idx in range(err_pos.shape[1]):
            bits[err_pos[s, idx]] = 1
        for idx in range(era_pos.shape[1]):
            erase[era_pos[s, idx]] = 1
        ok = decode_ee_kernel(bits, erase, n, dmin, exp, log, order, out)
        if ok == SUCCESS:
            w = 0
            for pos in range(n):
                if out[pos]:
                    w += 1
            weight_sum += w
            if w > 0:
                miscorrections += 1
        else:
            failures += 1
        for idx in range(err_pos.shape[1]):
            bits[err_pos[s, idx]] = 0
        for idx in range(era_pos.shape[1]):
            erase[era_pos[s, idx]] = 0
    return weight_sum, failures, miscorrections
