"""Frame-level Monte Carlo drivers: traditional simulation, table-driven
component-decoder emulation, the genie single-layer experiment, and the
overhead/latency code-search procedure.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .bch import BchCode, construct_bch
from .bounds import channel_at, genie_channel, genie_lower_bound, ncg, shannon_ebn0_db
from .channel import ChannelConfig, BsecParams, transmit
from .codec import (
    BmstConfig,
    component_layers,
    sliding_window_decode,
    superimpose,
)
from .de import DeConfig, ThresholdBracketError, ThresholdResult, de_threshold
from .tables import (
    MuLambdaTable,
    TableCoverageError,
    build_table,
    p_ij,
    region,
    sampled_cells,
)
from .ternary import ERASE, vote

_BATCH_FRAMES = 16  # stop checks happen on fixed batch edges, so the worker
                    # count never changes which frames run


@dataclass
class ExperimentSpec:
    """Everything that determines one BER-vs-Eb/N0 simulation."""

    q: int
    dmin: int
    shorten_by: int
    B: int
    m: int
    d: int
    L: int
    ebn0_grid_db: Sequence[float]
    imax: int = 15
    mode: str = "hdd"              # 'hdd' or 'sdd'
    engine: str = "real"           # 'real' or 'emulated'
    min_bit_errors: int = 100
    max_info_bits: int = 10_000_000
    max_frames: int = 100_000
    seed: int = 0
    rate_convention: str = "finite"  # 'finite': kL/(n(L+m)); 'asymptotic': k/n

    def __post_init__(self):
        grid = list(self.ebn0_grid_db)
        if any(b >= a for a, b in zip(grid[1:], grid)):
            raise ValueError("Eb/N0 grid must be strictly increasing")
        if self.min_bit_errors <= 0 or self.max_info_bits <= 0:
            raise ValueError("stopping rule must be positive")
        if self.mode not in ("hdd", "sdd"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.engine not in ("real", "emulated"):
            raise ValueError(f"unknown engine {self.engine!r}")

    def build_code(self) -> BchCode:
        return construct_bch(self.q, self.dmin, self.shorten_by)

    def build_config(self, code: Optional[BchCode] = None) -> BmstConfig:
        code = code or self.build_code()
        return BmstConfig(
            code=code, B=self.B, m=self.m, L=self.L, d=self.d,
            imax=self.imax, seed=self.seed,
        )

    def rate(self, config: BmstConfig) -> float:
        if self.rate_convention == "asymptotic":
            return config.code.k / config.code.n
        return config.rate


@dataclass
class BerPoint:
    ebn0_db: float
    bits_sent: int
    bit_errors: int
    frames: int
    frame_errors: int
    ber: float
    fer: float
    ci_low: float
    ci_high: float
    wall_time_s: float
    engine: str
    seed: int

    @staticmethod
    def csv_header() -> list[str]:
        return ["ebn0_db", "ber", "fer", "bits", "errors",
                "ci_low", "ci_high", "engine", "seed"]

    def csv_row(self) -> list:
        return [self.ebn0_db, f"{self.ber:.6e}", f"{self.fer:.6e}",
                self.bits_sent, self.bit_errors,
                f"{self.ci_low:.6e}", f"{self.ci_high:.6e}",
                self.engine, self.seed]


def write_csv(points: Sequence[BerPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BerPoint.csv_header())
        for pt in points:
            writer.writerow(pt.csv_row())


def _binomial_ci(errors: int, bits: int, z: float = 1.96) -> tuple[float, float]:
    if bits == 0:
        return (0.0, 1.0)
    phat = errors / bits
    half = z * math.sqrt(max(phat * (1 - phat), 1e-300) / bits)
    return (max(phat - half, 0.0), min(phat + half, 1.0))


class TableNodeC:
    """Component-decoder emulation: instead of decoding, count the errors
    and erasures of the input against the known transmitted codeword and
    sample the outcome from the (mu, lambda) table.

    Successful decodes emit the true codeword; the miscorrection mass is
    reproduced by occasionally flipping dmin uniformly-placed bits, with the
    event probability chosen so the expected error weight matches mu.

    Outcome draws are fixed per (layer, word) for the lifetime of the
    engine: a real decoder is deterministic in its input, so when the same
    word comes back with a slightly different (i, j) the verdict must not
    re-randomize; it just follows the moving lambda across the frozen draw.
    """

    def __init__(self, code: BchCode, table: MuLambdaTable,
                 truth_words: np.ndarray, rng: np.random.Generator):
        if not table.matches(code):
            raise TableCoverageError("table was built for a different code")
        self.code = code
        self.table = table
        self.truth = truth_words  # (L, B, n) transmitted component codewords
        self.rng = rng
        self._engine_seed = int(rng.integers(0, 2**63))
        self._mu, self._lam, self._cov = table.dense()
        self._draws: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self.decisions = {"radius": 0, "certain_failure": 0, "sampled_ok": 0,
                          "sampled_fail": 0, "miscorrected": 0}

    def _layer_draws(self, layer: int, count: int):
        if layer not in self._draws:
            self._draws[layer] = (self.rng.random(count), self.rng.random(count))
        return self._draws[layer]

    def decode(self, layer: int, block: np.ndarray):
        code = self.code
        n, dmin = code.n, code.dmin
        words = block.reshape(-1, n)
        truth = self.truth[layer]
        erased = words == ERASE
        errs = ((words != truth) & ~erased).sum(axis=1)
        eras = erased.sum(axis=1)

        in_radius = 2 * errs + eras < dmin
        certain_fail = eras >= dmin
        sampled = ~in_radius & ~certain_fail
        if sampled.any():
            si, sj = errs[sampled], eras[sampled]
            if not self._cov[sj, si].all():
                bad = np.nonzero(~self._cov[sj, si])[0][0]
                raise TableCoverageError(
                    f"cell (i={si[bad]}, j={sj[bad]}) has no samples"
                )
        lam = np.zeros(words.shape[0])
        mu = np.zeros(words.shape[0])
        lam[certain_fail] = 1.0
        lam[sampled] = self._lam[eras[sampled], errs[sampled]]
        mu[sampled] = self._mu[eras[sampled], errs[sampled]]

        u_fail, u_mis = self._layer_draws(layer, words.shape[0])
        success = u_fail >= lam
        codewords = np.where(success[:, None], truth, 0).astype(np.uint8)
        # reproduce the miscorrection mass with weight-dmin flip bursts
        lam_safe = np.minimum(lam, 1.0 - 1e-12)
        p_mis = np.minimum(mu * n / ((1.0 - lam_safe) * dmin), 1.0)
        mis = success & (u_mis < p_mis)
        for b in np.nonzero(mis)[0]:
            flip_rng = np.random.default_rng(
                np.random.SeedSequence((self._engine_seed, layer, int(b)))
            )
            flips = flip_rng.choice(n, size=dmin, replace=False)
            codewords[b, flips] ^= 1
        out = np.where(success[:, None], codewords, ERASE).astype(np.uint8)

        self.decisions["radius"] += int(in_radius.sum())
        self.decisions["certain_failure"] += int(certain_fail.sum())
        self.decisions["sampled_ok"] += int((sampled & success).sum())
        self.decisions["sampled_fail"] += int((sampled & ~success).sum())
        self.decisions["miscorrected"] += int(mis.sum())
        return out.ravel(), success, codewords


def _frame_seed(seed: int, point_idx: int, frame_idx: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=(seed, point_idx, frame_idx))


def _run_frame(spec: ExperimentSpec, config: BmstConfig, chan: ChannelConfig,
               point_idx: int, frame_idx: int,
               table: Optional[MuLambdaTable]) -> tuple[int, int]:
    """One end-to-end frame; returns (info bit errors, info bits)."""
    code = config.code
    data_rng, chan_rng, dec_rng = [
        np.random.default_rng(s)
        for s in _frame_seed(spec.seed, point_idx, frame_idx).spawn(3)
    ]
    data = data_rng.integers(0, 2, size=(config.L, config.kB), dtype=np.uint8)
    layers = component_layers(config, data)
    received = transmit_blocks(superimpose(config, layers), chan, chan_rng)
    engine = None
    if spec.engine == "emulated":
        truth = layers[: config.L].reshape(config.L, config.B, code.n)
        engine = TableNodeC(code, table, truth, dec_rng)
    result = sliding_window_decode(config, received, dec_rng, engine=engine)
    errors = int((result.info_bits != data).sum())
    return errors, data.size


def transmit_blocks(blocks: np.ndarray, chan: ChannelConfig,
                    rng: np.random.Generator) -> np.ndarray:
    flat = transmit(blocks.ravel(), chan, rng)
    return flat.reshape(blocks.shape)


def _point_channel(spec: ExperimentSpec, config: BmstConfig,
                   ebn0_db: float) -> ChannelConfig:
    rate = spec.rate(config)
    if spec.mode == "sdd":
        return ChannelConfig.sdd(ebn0_db, rate)
    return ChannelConfig.hdd(ebn0_db, rate)


def run_point(spec: ExperimentSpec, config: BmstConfig, point_idx: int,
              table: Optional[MuLambdaTable] = None,
              workers: int = 1) -> BerPoint:
    """Monte Carlo at one Eb/N0 until the stopping rule fires.

    Frames run in fixed-size batches with per-frame seed streams, so the
    results are byte-identical for any worker count.
    """
    ebn0_db = list(spec.ebn0_grid_db)[point_idx]
    chan = _point_channel(spec, config, ebn0_db)
    t0 = time.perf_counter()
    bits = errors = frames = frame_errors = 0
    frame_idx = 0
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while True:
            batch = [
                frame_idx + k
                for k in range(_BATCH_FRAMES)
                if frame_idx + k < spec.max_frames
            ]
            if not batch:
                break
            if pool is not None:
                results = list(pool.map(
                    _frame_worker,
                    [(spec, config, chan, point_idx, fi, table) for fi in batch],
                ))
            else:
                results = [
                    _run_frame(spec, config, chan, point_idx, fi, table)
                    for fi in batch
                ]
            for err, nbits in results:
                bits += nbits
                errors += err
                frames += 1
                frame_errors += err > 0
            frame_idx += len(batch)
            if errors >= spec.min_bit_errors or bits >= spec.max_info_bits:
                break
            if frame_idx >= spec.max_frames:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    ci = _binomial_ci(errors, bits)
    return BerPoint(
        ebn0_db=ebn0_db, bits_sent=bits, bit_errors=errors, frames=frames,
        frame_errors=frame_errors, ber=errors / bits if bits else 0.0,
        fer=frame_errors / frames if frames else 0.0,
        ci_low=ci[0], ci_high=ci[1],
        wall_time_s=time.perf_counter() - t0,
        engine=spec.engine, seed=spec.seed,
    )


def _frame_worker(args):
    return _run_frame(*args)


def run_traditional(spec: ExperimentSpec, workers: int = 1) -> list[BerPoint]:
    """Full pipeline per grid point: random data, BMST encoding, quantized
    AWGN, sliding-window decoding, information-bit error counting."""
    if spec.engine != "real":
        spec = replace(spec, engine="real")
    config = spec.build_config()
    return [
        run_point(spec, config, idx, workers=workers)
        for idx in range(len(list(spec.ebn0_grid_db)))
    ]


def run_table_emulated(spec: ExperimentSpec, table: MuLambdaTable,
                       workers: int = 1) -> list[BerPoint]:
    """Same message flow, but the component decoder is emulated from the
    (mu, lambda) table against the known transmitted codewords."""
    if spec.engine != "emulated":
        spec = replace(spec, engine="emulated")
    config = spec.build_config()
    if not table.matches(config.code):
        raise TableCoverageError("table was built for a different code")
    return [
        run_point(spec, config, idx, table=table, workers=workers)
        for idx in range(len(list(spec.ebn0_grid_db)))
    ]


# -- genie single-layer experiment --------------------------------------

def genie_single_layer(code: BchCode, p: BsecParams, m: int, trials: int,
                       rng: np.random.Generator,
                       chunk: int = 4096) -> tuple[float, float]:
    """Empirical BER of the genie setting: one codeword sent m+1 times over
    the BSEC, majority-combined, then decoded once.  Failures fall back to
    the combined word with erasures resolved uniformly at random.

    Returns (ber, standard error of ber).
    """
    n = code.n
    copies = m + 1
    total_err = 0.0
    total_sq = 0.0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        info = rng.integers(0, 2, size=(size, code.k), dtype=np.uint8)
        cw = code.encode_block(info)
        u = rng.random((size, copies, n))
        reps = np.broadcast_to(cw[:, None, :], (size, copies, n)).copy()
        reps[u >= p.p0] ^= 1                       # flipped...
        reps[u >= p.p0 + p.p1] = ERASE             # ...unless erased
        combined = vote(np.swapaxes(reps, 0, 1))
        decoded, success = code.decode_block(combined)
        err_bits = np.zeros(size)
        ok = success
        err_bits[ok] = (decoded[ok] != cw[ok]).sum(axis=1)
        if (~ok).any():
            bad = np.nonzero(~ok)[0]
            filled = combined[bad].copy()
            mask = filled == ERASE
            filled[mask] = rng.integers(0, 2, size=int(mask.sum()), dtype=np.uint8)
            err_bits[bad] = (filled != cw[bad]).sum(axis=1)
        total_err += float(err_bits.sum())
        total_sq += float((err_bits ** 2).sum())
        done += size
    mean_err = total_err / trials
    var_err = max(total_sq / trials - mean_err ** 2, 0.0)
    ber = mean_err / n
    stderr = math.sqrt(var_err / trials) / n
    return ber, stderr


# -- code search ---------------------------------------------------------

@dataclass
class Candidate:
    n: int
    k: int
    dmin: int
    q: int
    shorten_by: int
    overhead: float
    m: int
    B: int
    d: int
    latency: int
    genie_ber: float
    eval_ebn0_db: float
    de_threshold_db: Optional[float] = None
    ncg_db: Optional[float] = None


def decoding_latency(n: int, B: int, d: int) -> int:
    """Bits buffered by the window decoder: n * B * (d + 1)."""
    return n * B * (d + 1)


def coverage_cells(code: BchCode, p: BsecParams, tail_bound: float) -> list[tuple[int, int]]:
    """Sampled-region cells needed so the mass left uncovered at channel p
    stays below tail_bound (smallest 2i+j first)."""
    cells = sampled_cells(code)
    masses = [(c, p_ij(code.n, c[0], c[1], p)) for c in cells]
    total = sum(m for _, m in masses)
    masses.sort(key=lambda cm: -cm[1])
    keep: list[tuple[int, int]] = []
    acc = 0.0
    for cell, mass in masses:
        if total - acc <= tail_bound * 0.5:
            break
        keep.append(cell)
        acc += mass
    return keep


def ensure_coverage(code: BchCode, table: MuLambdaTable, p: BsecParams,
                    samples_per_cell: int, tail_bound: float,
                    seed: int = 0, margin: float = 1e-3) -> MuLambdaTable:
    """Extend a table until evaluating at channel p meets the tail bound.

    Coverage is taken out to margin * tail_bound so nearby operating points
    (bisection probes, slightly harsher message densities) are covered by
    the same extension.
    """
    need = [c for c in coverage_cells(code, p, tail_bound * margin)
            if c not in table.cells
            or table.cells[c].samples < samples_per_cell]
    if need:
        build_table(code, samples_per_cell, seed=seed, cells=need, base=table)
    return table


def de_threshold_with_coverage(cfg: DeConfig, rate: float, mode: str,
                               samples_per_cell: int, seed: int = 0,
                               max_extensions: int = 25,
                               **threshold_kwargs) -> ThresholdResult:
    """de_threshold that grows the table on demand: whenever the recursion
    pushes probability mass onto unsampled cells, those cells are sampled
    and the search restarts."""
    for _ in range(max_extensions):
        try:
            return de_threshold(cfg, rate, mode, **threshold_kwargs)
        except TableCoverageError as err:
            if err.triple is None:
                raise
            ensure_coverage(cfg.code, cfg.table, err.triple,
                            samples_per_cell, cfg.tail_bound, seed=seed)
    return de_threshold(cfg, rate, mode, **threshold_kwargs)


def code_search(overhead: float, latency_budget: int, target_ber: float,
                mode: str = "hdd", q_range: Sequence[int] = range(5, 11),
                dmin_range: Sequence[int] = range(5, 26, 2),
                m_max: int = 6, samples_per_cell: int = 10_000,
                oh_rel_tol: float = 5e-3, tail_bound: float = 1e-20,
                rank_by_de: bool = True, seed: int = 0,
                de_layers: int = 120) -> list[Candidate]:
    """Four-step candidate search.

    1. enumerate BCH codes (shortened if necessary) matching the overhead;
    2. per candidate, pick the smallest memory whose genie-aided floor at
       one dB past the Shannon limit of this receiver sits below the target;
    3. rank candidates by their density-evolution threshold (optional);
    4. size the Cartesian product order B from the latency budget with the
       near-optimal delay d = 2m.

    An empty list means no candidate satisfied the constraints.
    """
    if overhead <= 0:
        raise ValueError("overhead must be positive")
    candidates: list[Candidate] = []
    for q in q_range:
        for dmin in dmin_range:
            try:
                parent = construct_bch(q, dmin, 0)
            except Exception:
                continue
            red = parent.n - parent.k  # redundancy survives shortening
            k = round(red / overhead)
            if k <= 0 or k > parent.k:
                continue
            oh = red / k
            if abs(oh - overhead) > oh_rel_tol * overhead:
                continue
            shorten = parent.k - k
            code = construct_bch(q, dmin, shorten)
            rate = code.k / code.n
            eval_db = shannon_ebn0_db(rate, mode) + 1.0
            p = channel_at(eval_db, rate, mode)
            table = MuLambdaTable(code, seed=seed)
            chosen = None
            genie_val = None
            for m in range(1, m_max + 1):
                ptilde = genie_channel(p, m)
                ensure_coverage(code, table, ptilde, samples_per_cell,
                                tail_bound, seed=seed)
                est = genie_lower_bound(code, table, p, m, tail_bound)
                if est.ber <= target_ber:
                    chosen, genie_val = m, est.ber
                    break
            if chosen is None:
                continue
            d = 2 * chosen
            B = latency_budget // (code.n * (d + 1))
            if B < 1:
                continue
            cand = Candidate(
                n=code.n, k=code.k, dmin=dmin, q=q, shorten_by=shorten,
                overhead=oh, m=chosen, B=B, d=d,
                latency=decoding_latency(code.n, B, d),
                genie_ber=genie_val, eval_ebn0_db=eval_db,
            )
            if rank_by_de:
                ensure_coverage(code, table, p, samples_per_cell,
                                tail_bound, seed=seed)
                cfg = DeConfig(code, table, chosen, d,
                               n_layers=de_layers, target_ber=target_ber,
                               tail_bound=tail_bound)
                try:
                    th = de_threshold_with_coverage(
                        cfg, rate, mode, samples_per_cell, seed=seed,
                        ebn0_lo_db=max(eval_db - 1.5, 0.0),
                        ebn0_hi_db=eval_db + 5.0,
                    )
                    cand.de_threshold_db = th.ebn0_db
                    cand.ncg_db = ncg(th.ebn0_db, target_ber)
                except ThresholdBracketError:
                    pass
            candidates.append(cand)
    if rank_by_de:
        candidates.sort(
            key=lambda c: c.de_threshold_db if c.de_threshold_db is not None
            else float("inf")
        )
    else:
        candidates.sort(key=lambda c: c.genie_ber)
    return candidates
