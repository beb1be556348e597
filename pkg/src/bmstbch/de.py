"""Density evolution for the sliding-window decoder.

Messages on the cycle-free graph are summarized by a probability triple
(alpha, beta, gamma) = P(correct), P(flipped), P(erased); `BsecParams` is
reused as that triple.  Each graph node maps input triples to an extrinsic
output triple; the component-code node consumes the per-cell decoder
statistics.  Running the window recursion over a long chain of layers and
asking whether every layer's BER falls below a target yields decoding
thresholds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bch import BchCode
from .bounds import channel_at
from .channel import BsecParams
from .tables import MuLambdaTable, TableCoverageError, evaluate_over_bsec

ProbTriple = BsecParams


def _triple(a: float, b: float, g: float) -> BsecParams:
    """Clip float dust and renormalize so the invariant constructor passes."""
    a, b, g = max(a, 0.0), max(b, 0.0), max(g, 0.0)
    total = a + b + g
    return BsecParams(a / total, b / total, g / total)


def _fold_pair(x: BsecParams, y: BsecParams) -> tuple[float, float, float]:
    a = x.p0 * y.p0 + x.p1 * y.p1
    b = x.p0 * y.p1 + x.p1 * y.p0
    g = x.pe + y.pe - x.pe * y.pe
    return a, b, g


def de_node_plus(inputs: Sequence[BsecParams]) -> BsecParams:
    """Extrinsic triple of the XOR node: correct iff an even number of the
    m+1 contributing edges flip and none erase; any erasure erases."""
    acc = BsecParams(1.0, 0.0, 0.0)
    for t in inputs:
        acc = _triple(*_fold_pair(acc, t))
    return acc


def _vote_distribution(inputs: Sequence[BsecParams]) -> tuple[float, float, float]:
    """P(majority correct), P(majority flipped), P(tie) for a componentwise
    vote among the non-erased inputs."""
    n = len(inputs)
    dist = np.zeros(2 * n + 1)
    dist[n] = 1.0  # index = (#correct - #flip) + n
    for t in inputs:
        nxt = np.zeros_like(dist)
        nxt[1:] += dist[:-1] * t.p0
        nxt[:-1] += dist[1:] * t.p1
        nxt += dist * t.pe
        dist = nxt
    return float(dist[n + 1:].sum()), float(dist[:n].sum()), float(dist[n])


def de_node_equal_to_C(inputs: Sequence[BsecParams]) -> BsecParams:
    """Triple sent to the component-code node: majority vote over the m+1
    replica edges."""
    return _triple(*_vote_distribution(inputs))


def de_node_equal_to_plus(c_input: BsecParams,
                          others: Sequence[BsecParams]) -> BsecParams:
    """Triple sent back to an XOR node: the component-node verdict passes
    through; where it is erased, the remaining m edges vote."""
    if not others:
        return c_input
    va, vb, vg = _vote_distribution(others)
    return _triple(
        c_input.p0 + c_input.pe * va,
        c_input.p1 + c_input.pe * vb,
        c_input.pe * vg,
    )


def de_node_C(code: BchCode, table: MuLambdaTable, msg: BsecParams,
              tail_bound: float = 1e-20) -> tuple[BsecParams, float]:
    """Extrinsic triple and BER of the component-code node: outcome masses of
    a bounded-distance decode against the (i, j) distribution induced by the
    input triple.  Uncovered cells count as failures and may carry at most
    tail_bound probability."""
    s = evaluate_over_bsec(code.n, code.dmin, table.dense(), msg)
    if s.uncovered > tail_bound:
        raise TableCoverageError(
            f"node-C input {msg.as_tuple()} puts {s.uncovered:.3e} mass on "
            f"unsampled cells (> {tail_bound:.1e}); extend the table",
            triple=msg,
        )
    return _triple(s.correct, s.miscorrect, s.failure + s.uncovered), s.ber


@dataclass
class DeConfig:
    """Analytic counterpart of a decoder configuration."""

    code: BchCode
    table: MuLambdaTable
    m: int
    d: int
    imax: int = 15
    n_layers: int = 200
    target_ber: float = 1e-15
    tail_bound: float = 1e-20
    steady_tol: float = 1e-12


@dataclass
class DeResult:
    success: bool
    ber_trace: np.ndarray  # per-layer estimated BER up to the stopping layer
    layers_run: int        # window positions actually evaluated


_KNOWN = BsecParams(1.0, 0.0, 0.0)
_ERASED = BsecParams(0.0, 0.0, 1.0)


def de_run(cfg: DeConfig, p: BsecParams) -> DeResult:
    """Window recursion of the message densities across cfg.n_layers layers.

    Per window position the d+1 layers update layer-by-layer (XOR node,
    replica node, component node, replica node, XOR node) for up to imax
    iterations; the oldest layer then declares success iff its BER is at
    most the target, gets treated as known, and the window shifts.  Once the
    shifted window state repeats within steady_tol the remaining layers are
    declared by that fixed point.
    """
    m, d, L = cfg.m, cfg.d, cfg.n_layers
    to_plus = [[_ERASED] * (m + 1) for _ in range(L)]
    to_eq = [[_ERASED] * (m + 1) for _ in range(L)]
    decided = [False] * L
    last_ber = [1.0] * L
    trace = np.zeros(L)

    def plus_input(tau: int, i: int) -> BsecParams:
        t = tau - i
        if t < 0 or t >= L or decided[t]:
            return _KNOWN
        return to_plus[t][i]

    def process_layer(tau: int) -> None:
        ins = [p] + [plus_input(tau, i) for i in range(m + 1)]
        for i in range(m + 1):
            t = tau - i
            if 0 <= t < L and not decided[t]:
                others = [ins[j] for j in range(m + 2) if j != i + 1]
                to_eq[t][i] = de_node_plus(others)
        if tau >= L or decided[tau]:
            return
        c_in = de_node_equal_to_C(to_eq[tau])
        c_out, ber = de_node_C(cfg.code, cfg.table, c_in, cfg.tail_bound)
        last_ber[tau] = ber
        for i in range(m + 1):
            others = [to_eq[tau][j] for j in range(m + 1) if j != i]
            to_plus[tau][i] = de_node_equal_to_plus(c_out, others)

    def window_state(t: int) -> np.ndarray:
        vals: list[float] = []
        for tau in range(t, min(t + d, L - 1) + 1):
            for i in range(m + 1):
                vals.extend(to_plus[tau][i].as_tuple())
                vals.extend(to_eq[tau][i].as_tuple())
        return np.array(vals)

    prev_state: Optional[np.ndarray] = None
    for t in range(L):
        top = min(t + d, L + m - 1)
        window = range(t, top + 1)
        prev_iter: Optional[np.ndarray] = None
        for _ in range(cfg.imax):
            for tau in window:
                if tau < L + m:
                    process_layer(tau)
            state = window_state(t)
            if prev_iter is not None and state.shape == prev_iter.shape and \
                    np.max(np.abs(state - prev_iter), initial=0.0) < 1e-15:
                break  # exact fixed point; further iterations are no-ops
            prev_iter = state
        trace[t] = last_ber[t]
        if last_ber[t] > cfg.target_ber:
            return DeResult(False, trace[: t + 1], t + 1)
        decided[t] = True

        state = window_state(t + 1)
        if prev_state is not None and state.shape == prev_state.shape and \
                np.max(np.abs(state - prev_state), initial=0.0) < cfg.steady_tol:
            trace[t + 1:] = last_ber[t]
            return DeResult(True, trace, t + 1)
        prev_state = state

    return DeResult(True, trace, L)


@dataclass
class ThresholdResult:
    """Smallest Eb/N0 (to tol_db) at which the density recursion reaches the
    target BER on every layer, with the bracketing certificate."""

    ebn0_db: float
    target_ber: float
    converged: bool
    iterations: int
    mode: str
    bracket_fail_db: float
    bracket_success_db: float
    tol_db: float = 0.01

    def to_json(self) -> dict:
        return {
            "ebn0_threshold_db": self.ebn0_db,
            "target_ber": self.target_ber,
            "converged": self.converged,
            "iterations": self.iterations,
            "mode": self.mode,
            "bracket": {
                "fail_db": self.bracket_fail_db,
                "success_db": self.bracket_success_db,
            },
            "tol_db": self.tol_db,
        }


class ThresholdBracketError(RuntimeError):
    """No (failing, succeeding) Eb/N0 pair found in the scanned range."""


def de_threshold(cfg: DeConfig, rate: float, mode: str,
                 ebn0_lo_db: float = 0.0, ebn0_hi_db: float = 10.0,
                 scan_step_db: float = 0.25, tol_db: float = 0.01) -> ThresholdResult:
    """Bisect Eb/N0 for the smallest point where de_run succeeds.

    The SDD mode re-optimizes the quantizer threshold at every probed point.
    A coarse upward scan first certifies a bracket: the low end must fail
    and some scanned point must succeed.
    """
    evals = 0

    def succeeds(ebn0: float) -> bool:
        nonlocal evals
        evals += 1
        return de_run(cfg, channel_at(ebn0, rate, mode)).success

    if succeeds(ebn0_lo_db):
        raise ThresholdBracketError(
            f"low end {ebn0_lo_db} dB already succeeds; no bracket"
        )
    lo = ebn0_lo_db
    hi = None
    x = ebn0_lo_db + scan_step_db
    while x <= ebn0_hi_db + 1e-12:
        if succeeds(x):
            hi = x
            break
        lo = x
        x += scan_step_db
    if hi is None:
        raise ThresholdBracketError(
            f"no success up to {ebn0_hi_db} dB for mode={mode}"
        )
    bracket = (lo, hi)
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if succeeds(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdResult(
        ebn0_db=hi,
        target_ber=cfg.target_ber,
        converged=True,
        iterations=evals,
        mode=mode,
        bracket_fail_db=bracket[0],
        bracket_success_db=bracket[1],
        tol_db=tol_db,
    )


def save_threshold(result: ThresholdResult, path, config: Optional[dict] = None) -> None:
    doc = result.to_json()
    if config:
        doc["config"] = config
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
