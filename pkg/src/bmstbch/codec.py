"""BMST encoding and iterative sliding-window decoding with ternary messages.

The encoder superimposes (XORs) interleaved copies of the previous m encoded
blocks onto the current one and appends m all-zero termination blocks.  The
decoder passes {0, 1, e} messages around a layered normal graph: per layer a
channel-facing XOR node, m+1 interleavers, a replication (vote) node and the
component-code node that runs B independent errors-and-erasures decodings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bch import BchCode
from .ternary import ERASE, box_plus, box_plus_many, random_fill, vote


@dataclass
class BmstConfig:
    """Parameters of one BMST-BCH system instance.

    The m+1 interleavers are uniform random permutations of length n*B drawn
    once from the seed (including the 0th) and then fixed.
    """

    code: BchCode
    B: int
    m: int
    L: int
    d: int
    imax: int = 15
    seed: int = 0
    use_partial_sums: bool = False
    interleavers: Optional[np.ndarray] = None  # (m+1, nB); drawn from seed if absent
    deinterleavers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.B < 1 or self.m < 0 or self.d < 0:
            raise ValueError("B >= 1, m >= 0 and d >= 0 required")
        if self.L <= self.m:
            raise ValueError("need more data blocks than the encoding memory")
        if self.interleavers is None:
            rng = np.random.default_rng(np.random.SeedSequence(self.seed))
            self.interleavers = np.stack(
                [rng.permutation(self.nB) for _ in range(self.m + 1)]
            )
        else:
            self.interleavers = np.asarray(self.interleavers)
            if self.interleavers.shape != (self.m + 1, self.nB):
                raise ValueError(f"need {self.m + 1} permutations of length {self.nB}")
        inv = np.empty_like(self.interleavers)
        for i in range(self.m + 1):
            inv[i, self.interleavers[i]] = np.arange(self.nB)
        self.deinterleavers = inv

    @property
    def nB(self) -> int:
        return self.code.n * self.B

    @property
    def kB(self) -> int:
        return self.code.k * self.B

    @property
    def rate(self) -> float:
        """Overall rate k L / (n (L + m)), including termination loss."""
        return (self.code.k * self.L) / (self.code.n * (self.L + self.m))

    def interleave(self, block: np.ndarray, i: int) -> np.ndarray:
        return block[self.interleavers[i]]

    def deinterleave(self, block: np.ndarray, i: int) -> np.ndarray:
        return block[self.deinterleavers[i]]


def component_layers(config: BmstConfig, data: np.ndarray) -> np.ndarray:
    """B-fold component encodings of each data block, plus the all-zero
    termination layers: shape (L+m, nB)."""
    data = np.asarray(data, dtype=np.uint8)
    if data.shape != (config.L, config.kB):
        raise ValueError(f"expected data shape {(config.L, config.kB)}")
    code, B = config.code, config.B
    v = np.zeros((config.L + config.m, config.nB), dtype=np.uint8)
    for t in range(config.L):
        v[t] = code.encode_block(data[t].reshape(B, code.k)).ravel()
    return v


def superimpose(config: BmstConfig, v: np.ndarray) -> np.ndarray:
    """XOR each layer with the interleaved m previous layers."""
    out = np.zeros_like(v)
    for t in range(v.shape[0]):
        acc = out[t]
        for i in range(config.m + 1):
            if t - i >= 0:
                acc ^= v[t - i][config.interleavers[i]]
    return out


def bmst_encode(config: BmstConfig, data: np.ndarray) -> np.ndarray:
    """Encode L blocks of k*B information bits into L+m blocks of n*B bits.

    Block t of the output is the XOR of the interleaved component-encoded
    blocks t, t-1, ..., t-m (missing ones count as zero); the final m blocks
    carry the all-zero termination data.
    """
    return superimpose(config, component_layers(config, data))


# -- node update rules -------------------------------------------------

def node_plus_update(inputs: Sequence[np.ndarray],
                     use_partial_sums: bool = False) -> list[np.ndarray]:
    """Extrinsic outputs of the XOR node: for each edge, the box-plus of all
    the other edges' inputs."""
    blocks = [np.asarray(b, dtype=np.uint8) for b in inputs]
    n_edges = len(blocks)
    if n_edges == 1:
        return [np.zeros_like(blocks[0])]
    if use_partial_sums:
        # shared-sum formulation: one pass builds the total XOR and erasure
        # count, each extrinsic then backs its own edge out
        stack = np.stack(blocks)
        erased = stack == ERASE
        bits = np.where(erased, 0, stack)
        xor_tot = np.bitwise_xor.reduce(bits, axis=0)
        er_tot = erased.sum(axis=0, dtype=np.int16)
        out2d = np.where(er_tot[None, :] - erased > 0, ERASE, xor_tot[None, :] ^ bits)
        return [row.astype(np.uint8) for row in out2d]
    return [
        box_plus_many([blocks[j] for j in range(n_edges) if j != i])
        for i in range(n_edges)
    ]


def node_equal_to_C(inputs: Sequence[np.ndarray]) -> np.ndarray:
    """Message toward the component-code node: componentwise majority among
    the non-erased replica messages, erasure on ties."""
    return vote(inputs)


def node_equal_to_pi(c_msg: np.ndarray, others: Sequence[np.ndarray]) -> np.ndarray:
    """Message toward one interleaver edge: pass the component-code verdict
    through where it is decided, otherwise vote among the remaining edges."""
    c_msg = np.asarray(c_msg, dtype=np.uint8)
    others = list(others)
    if not others:
        return c_msg.copy()
    voted = vote(others)
    return np.where(c_msg != ERASE, c_msg, voted).astype(np.uint8)


def _vote_from_counts(zeros: np.ndarray, ones: np.ndarray) -> np.ndarray:
    out = np.full(zeros.shape, ERASE, dtype=np.uint8)
    np.copyto(out, 0, where=zeros > ones)
    np.copyto(out, 1, where=ones > zeros)
    return out


def node_C_update(code: BchCode, block: np.ndarray) -> np.ndarray:
    """Extrinsic output of the component-code node: each of the B words is
    decoded independently; a success emits the codeword, a failure emits
    all erasures."""
    out, _, _ = RealNodeC(code).decode(0, block)
    return out


# -- component-code engines --------------------------------------------

class RealNodeC:
    """Node-C engine backed by the actual errors-and-erasures decoder."""

    def __init__(self, code: BchCode):
        self.code = code

    def decode(self, layer: int, block: np.ndarray):
        """Returns (extrinsic ternary block, success mask, codeword bits)."""
        code = self.code
        words = block.reshape(-1, code.n)
        decoded, success = code.decode_block(words)
        out = np.full(words.shape, ERASE, dtype=np.uint8)
        out[success] = decoded[success]
        return out.ravel(), success, decoded


@dataclass
class DecodeResult:
    info_bits: np.ndarray       # (L, kB) decided information bits
    word_success: np.ndarray    # (L, B) node-C verdict at decision time
    iterations: np.ndarray      # (L,) iterations used per window position
    decided_words: np.ndarray   # (L, B, n) component words used in cancelation


def sliding_window_decode(config: BmstConfig, received: np.ndarray,
                          rng: np.random.Generator,
                          engine=None) -> DecodeResult:
    """Iterative sliding-window decoding with delay d.

    Per window position: up to imax iterations, each a forward then a
    backward sweep over the d+1 window layers with the per-layer schedule
    XOR node -> interleavers -> vote node -> component decode -> vote node
    -> interleavers -> XOR node; early exit once the component-node outputs
    repeat.  The oldest layer is then decided, its contribution is removed
    from the later channel messages, and the window shifts.
    """
    received = np.asarray(received, dtype=np.uint8)
    L, m, d = config.L, config.m, config.d
    code, B, nB = config.code, config.B, config.nB
    if received.shape != (L + m, nB):
        raise ValueError(f"expected received shape {(L + m, nB)}")
    engine = engine if engine is not None else RealNodeC(code)

    zeros = np.zeros(nB, dtype=np.uint8)
    y = [received[t].copy() for t in range(L + m)]
    # to_plus[t][i]: replica node t -> XOR node t+i, interleaved domain
    # to_eq[t][i]:   XOR node t+i -> replica node t, component domain
    to_plus = [[np.full(nB, ERASE, np.uint8) for _ in range(m + 1)] for _ in range(L)]
    to_eq = [[np.full(nB, ERASE, np.uint8) for _ in range(m + 1)] for _ in range(L)]
    decided = np.zeros(L, dtype=bool)

    info_bits = np.zeros((L, config.kB), dtype=np.uint8)
    word_success = np.zeros((L, B), dtype=bool)
    iterations = np.zeros(L, dtype=np.int64)
    decided_words = np.zeros((L, B, code.n), dtype=np.uint8)

    # last node-C state per layer, reused when the input block is unchanged
    c_cache: list[Optional[tuple]] = [None] * L

    def plus_input(tau: int, i: int) -> np.ndarray:
        t = tau - i
        if t < 0 or t >= L or decided[t]:
            return zeros  # known-zero: termination data or canceled layer
        return to_plus[t][i]

    def run_node_c(t: int, c_in: np.ndarray):
        cached = c_cache[t]
        if cached is not None and np.array_equal(cached[0], c_in):
            return cached[1], cached[2], cached[3]
        c_msg, success, words = engine.decode(t, c_in)
        c_cache[t] = (c_in.copy(), c_msg, success, words)
        return c_msg, success, words

    def process_layer(tau: int) -> None:
        # XOR node: refresh every outgoing extrinsic message
        ins = [y[tau]] + [plus_input(tau, i) for i in range(m + 1)]
        outs = node_plus_update(ins, config.use_partial_sums)
        for i in range(m + 1):
            t = tau - i
            if 0 <= t < L and not decided[t]:
                to_eq[t][i] = config.deinterleave(outs[i + 1], i)
        if tau >= L or decided[tau]:
            return  # termination or already-decided layer: XOR relay only
        # replica node -> component decode -> replica node; the m+1
        # leave-one-out votes share the total symbol counts
        stack = np.stack(to_eq[tau])
        is0 = stack == 0
        is1 = stack == 1
        zeros_tot = is0.sum(axis=0, dtype=np.int16)
        ones_tot = is1.sum(axis=0, dtype=np.int16)
        c_in = _vote_from_counts(zeros_tot, ones_tot)
        c_msg, _, _ = run_node_c(tau, c_in)
        voted = _vote_from_counts(zeros_tot[None, :] - is0, ones_tot[None, :] - is1)
        z_all = np.where(c_msg[None, :] != ERASE, c_msg[None, :], voted)
        for i in range(m + 1):
            to_plus[tau][i] = config.interleave(z_all[i].astype(np.uint8), i)

    for t in range(L):
        top = min(t + d, L + m - 1)
        window = range(t, top + 1)
        last_snapshot = None
        used = config.imax
        for it in range(1, config.imax + 1):
            for tau in window:
                process_layer(tau)
            for tau in reversed(window):
                process_layer(tau)
            snapshot = np.concatenate(
                [c_cache[tau][1] for tau in window if tau < L and c_cache[tau]]
            )
            if last_snapshot is not None and np.array_equal(snapshot, last_snapshot):
                used = it
                break
            last_snapshot = snapshot
        iterations[t] = used

        # decide layer t from its final component-node state
        _, c_msg, success, words = c_cache[t]
        c_in = c_cache[t][0]
        v_words = words.copy()
        if not success.all():
            fail_idx = np.nonzero(~success)[0]
            sys_part = c_in.reshape(B, code.n)[fail_idx, code.systematic]
            filled = random_fill(sys_part, rng)
            v_words[fail_idx] = code.encode_block(filled)
        info_bits[t] = v_words[:, code.systematic].reshape(-1)
        word_success[t] = success
        decided_words[t] = v_words

        # cancelation: strip this layer's contribution from later blocks
        v_hat = v_words.reshape(-1)
        for i in range(1, m + 1):
            if t + i <= L + m - 1:
                y[t + i] = box_plus(y[t + i], config.interleave(v_hat, i))
        decided[t] = True

    return DecodeResult(info_bits, word_success, iterations, decided_words)
