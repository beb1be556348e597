"""Per-code decoder statistics: the probability P_{i,j} of i errors and j
erasures, Monte Carlo estimation of the miscorrection rate mu_{i,j} and the
failure rate lambda_{i,j}, and the resulting analytic bit error rate of a
BCH code over a BSEC.

The (i, j) plane splits into three regions: inside the bounded-distance
radius (2i + j < dmin) decoding always returns the transmitted codeword, so
mu = lambda = 0; with j >= dmin erasures decoding always fails, so mu = 0,
lambda = 1; the remaining cells are estimated by sampling random patterns
around the zero codeword.  Cell statistics depend only on the code, never on
the channel.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import kernels
from .bch import BchCode
from .channel import BsecParams

_CHUNK = 8192


class TableIntegrityError(ValueError):
    """Table file does not match the requested code."""


class TableCoverageError(ValueError):
    """The table lacks sampled cells carrying non-negligible probability.

    When raised from an evaluation, `triple` holds the (p0, p1, pe) point
    whose mass was uncovered, so callers can extend the table and retry.
    """

    def __init__(self, message: str, triple=None):
        super().__init__(message)
        self.triple = triple


def region(i: int, j: int, dmin: int) -> str:
    """'success' (guaranteed correct), 'failure' (guaranteed detected) or
    'sampled' (needs Monte Carlo)."""
    if 2 * i + j < dmin:
        return "success"
    if j >= dmin:
        return "failure"
    return "sampled"


def p_ij(n: int, i: int, j: int, p: BsecParams) -> float:
    """Probability that the channel puts exactly i errors and j erasures on
    a length-n word: C(n,i) C(n-i,j) p1^i pe^j p0^(n-i-j).

    Evaluated in log space so long codes do not overflow the coefficient.
    """
    if i < 0 or j < 0 or i + j > n:
        raise ValueError("need i, j >= 0 and i + j <= n")
    rest = n - i - j
    for count, prob in ((i, p.p1), (j, p.pe), (rest, p.p0)):
        if count > 0 and prob == 0.0:
            return 0.0
    logc = (
        math.lgamma(n + 1)
        - math.lgamma(i + 1)
        - math.lgamma(j + 1)
        - math.lgamma(rest + 1)
    )
    logp = sum(
        count * math.log(prob)
        for count, prob in ((i, p.p1), (j, p.pe), (rest, p.p0))
        if count > 0
    )
    return math.exp(logc + logp)


@dataclass
class CellStats:
    """Raw counters for one (i, j) cell; merging tables adds counters, so
    extending a run never invalidates earlier samples."""

    samples: int = 0
    weight_sum: int = 0      # summed Hamming weight of successful outputs
    failures: int = 0
    miscorrections: int = 0  # successes with nonzero output

    def merge(self, other: "CellStats") -> "CellStats":
        return CellStats(
            self.samples + other.samples,
            self.weight_sum + other.weight_sum,
            self.failures + other.failures,
            self.miscorrections + other.miscorrections,
        )

    def mu(self, n: int) -> float:
        return self.weight_sum / (n * self.samples) if self.samples else 0.0

    def lam(self) -> float:
        return self.failures / self.samples if self.samples else 0.0

    def lam_wilson(self, z: float = 1.96) -> tuple[float, float]:
        return wilson_interval(self.failures, self.samples, z)

    def miscorrection_wilson(self, z: float = 1.96) -> tuple[float, float]:
        return wilson_interval(self.miscorrections, self.samples, z)


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return (max(0.0, center - half), min(1.0, center + half))


class MuLambdaTable:
    """Monte Carlo estimates of (mu, lambda) per sampled (i, j) cell for one
    BCH code, with exact values hard-coded outside the sampled region."""

    FORMAT = "bch-mu-lambda"
    VERSION = 1

    def __init__(self, code: BchCode, seed: int = 0):
        self.n, self.k, self.dmin = code.params
        self.code_hash = code.construction_hash()
        self.seed = seed
        self.created = time.strftime("%Y-%m-%dT%H:%M:%S")
        self.cells: dict[tuple[int, int], CellStats] = {}
        self._dense: Optional[tuple] = None

    # -- queries --------------------------------------------------------

    def mu(self, i: int, j: int) -> float:
        r = region(i, j, self.dmin)
        if r != "sampled":
            return 0.0
        return self._cell(i, j).mu(self.n)

    def lam(self, i: int, j: int) -> float:
        r = region(i, j, self.dmin)
        if r == "success":
            return 0.0
        if r == "failure":
            return 1.0
        return self._cell(i, j).lam()

    def covered(self, i: int, j: int) -> bool:
        return region(i, j, self.dmin) != "sampled" or (i, j) in self.cells

    def _cell(self, i: int, j: int) -> CellStats:
        try:
            return self.cells[(i, j)]
        except KeyError:
            raise TableCoverageError(
                f"cell (i={i}, j={j}) of [{self.n},{self.k},{self.dmin}] "
                "has no samples"
            )

    def matches(self, code: BchCode) -> bool:
        return self.code_hash == code.construction_hash()

    def add(self, i: int, j: int, stats: CellStats) -> None:
        if region(i, j, self.dmin) != "sampled":
            raise ValueError(f"cell ({i}, {j}) is analytic, not sampled")
        cur = self.cells.get((i, j))
        self.cells[(i, j)] = cur.merge(stats) if cur else stats
        self._dense = None

    def merge(self, other: "MuLambdaTable") -> None:
        if (self.n, self.k, self.dmin, self.code_hash) != (
            other.n, other.k, other.dmin, other.code_hash
        ):
            raise TableIntegrityError("cannot merge tables for different codes")
        for key, stats in other.cells.items():
            cur = self.cells.get(key)
            self.cells[key] = cur.merge(stats) if cur else stats
        self._dense = None

    def dense(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(mu, lam, covered) arrays of shape (dmin, n+1), indexed [j, i];
        only sampled-region entries are meaningful."""
        if self._dense is None:
            mu = np.zeros((self.dmin, self.n + 1))
            lam = np.zeros((self.dmin, self.n + 1))
            cov = np.zeros((self.dmin, self.n + 1), dtype=bool)
            for (i, j), st in self.cells.items():
                mu[j, i] = st.mu(self.n)
                lam[j, i] = st.lam()
                cov[j, i] = st.samples > 0
            self._dense = (mu, lam, cov)
        return self._dense

    # -- serialization (versioned JSON, counters exact) ------------------

    def to_json(self) -> dict:
        return {
            "format": self.FORMAT,
            "version": self.VERSION,
            "code": {
                "n": self.n,
                "k": self.k,
                "dmin": self.dmin,
                "hash": self.code_hash,
            },
            "seed": self.seed,
            "created": self.created,
            "cells": {
                f"{i},{j}": {
                    "samples": st.samples,
                    "weight_sum": st.weight_sum,
                    "failures": st.failures,
                    "miscorrections": st.miscorrections,
                    "mu": f"{st.mu(self.n):.12e}",
                    "lambda": f"{st.lam():.12e}",
                }
                for (i, j), st in sorted(self.cells.items())
            },
        }

    @classmethod
    def from_json(cls, doc: dict, code: BchCode) -> "MuLambdaTable":
        if doc.get("format") != cls.FORMAT:
            raise TableIntegrityError("not a mu/lambda table file")
        meta = doc["code"]
        if meta["hash"] != code.construction_hash() or (
            meta["n"], meta["k"], meta["dmin"]
        ) != code.params:
            raise TableIntegrityError(
                f"table built for [{meta['n']},{meta['k']},{meta['dmin']}] "
                f"(hash {meta['hash']}), requested {code!r} "
                f"(hash {code.construction_hash()})"
            )
        table = cls(code, seed=doc.get("seed", 0))
        table.created = doc.get("created", table.created)
        for key, val in doc["cells"].items():
            i, j = (int(x) for x in key.split(","))
            table.cells[(i, j)] = CellStats(
                samples=val["samples"],
                weight_sum=val["weight_sum"],
                failures=val["failures"],
                miscorrections=val["miscorrections"],
            )
        return table


def save_table(table: MuLambdaTable, path) -> None:
    with open(path, "w") as fh:
        json.dump(table.to_json(), fh, indent=1)


def load_table(path, code: BchCode) -> MuLambdaTable:
    with open(path) as fh:
        doc = json.load(fh)
    return MuLambdaTable.from_json(doc, code)


# -- Monte Carlo estimation --------------------------------------------

def sample_cell(code: BchCode, i: int, j: int, samples: int,
                rng: np.random.Generator) -> CellStats:
    """Decode `samples` random weight-(i, j) patterns around the zero
    codeword and return the raw counters."""
    if region(i, j, code.dmin) != "sampled":
        raise ValueError(
            f"(i={i}, j={j}) is analytic for dmin={code.dmin}; nothing to sample"
        )
    if i + j > code.n:
        raise ValueError("pattern does not fit in the code length")
    n = code.n
    stats = CellStats()
    base = np.broadcast_to(np.arange(n, dtype=np.int32), (_CHUNK, n))
    done = 0
    while done < samples:
        size = min(_CHUNK, samples - done)
        pos = rng.permuted(base[:size].copy(), axis=1)[:, : i + j]
        w, f, mis = kernels.mu_lambda_kernel(
            np.ascontiguousarray(pos[:, :i]),
            np.ascontiguousarray(pos[:, i:]),
            n, code.dmin, code.field.exp, code.field.log, code.field.order,
        )
        stats = stats.merge(CellStats(size, int(w), int(f), int(mis)))
        done += size
    return stats


def estimate_mu_lambda(code: BchCode, i: int, j: int, samples: int,
                       rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo estimate of (mu_{i,j}, lambda_{i,j}); analytic regions are
    returned without sampling."""
    r = region(i, j, code.dmin)
    if r == "success":
        return (0.0, 0.0)
    if r == "failure":
        return (0.0, 1.0)
    stats = sample_cell(code, i, j, samples, rng)
    return (stats.mu(code.n), stats.lam())


def sampled_cells(code: BchCode, i_max: Optional[int] = None) -> list[tuple[int, int]]:
    """Sampled-region cells with i <= i_max, ordered by increasing 2i + j so
    the floor-dominant cells come first."""
    n, dmin = code.n, code.dmin
    i_cap = n if i_max is None else min(i_max, n)
    cells = [
        (i, j)
        for j in range(dmin)
        for i in range(n - j + 1)
        if i <= i_cap and 2 * i + j >= dmin
    ]
    cells.sort(key=lambda c: (2 * c[0] + c[1], c[1]))
    return cells


def build_table(code: BchCode, samples_per_cell: int, seed: int = 0,
                i_max: Optional[int] = None,
                cells: Optional[Iterable[tuple[int, int]]] = None,
                base: Optional[MuLambdaTable] = None) -> MuLambdaTable:
    """Build (or extend) a table by sampling every requested cell.

    Each cell draws from its own stream derived from (seed, i, j, prior
    sample count), so extending a table adds fresh, reproducible samples.
    """
    table = base if base is not None else MuLambdaTable(code, seed=seed)
    todo = list(cells) if cells is not None else sampled_cells(code, i_max)
    for (i, j) in todo:
        prior = table.cells.get((i, j), CellStats()).samples
        need = samples_per_cell - prior
        if need <= 0:
            continue
        rng = np.random.default_rng(np.random.SeedSequence((seed, i, j, prior)))
        table.add(i, j, sample_cell(code, i, j, need, rng))
    return table


# -- analytic BER over a BSEC ------------------------------------------

@dataclass(frozen=True)
class BsecSummary:
    """Outcome masses of one component decode with channel-state (i, j)
    marginalized out: success-with-given-output split plus the BER."""

    correct: float    # output equals the transmitted codeword
    miscorrect: float # success mass carrying bit errors (mu-weighted)
    failure: float    # detected failure mass
    ber: float
    uncovered: float  # probability mass on cells without samples


def _binom_pmf(m: int, p: float) -> np.ndarray:
    """pmf of Binomial(m, p) over 0..m, vectorized and safe at p in {0, 1}."""
    if m == 0:
        return np.ones(1)
    if p <= 0.0:
        out = np.zeros(m + 1)
        out[0] = 1.0
        return out
    if p >= 1.0:
        out = np.zeros(m + 1)
        out[m] = 1.0
        return out
    ks = np.arange(m + 1)
    logc = (
        math.lgamma(m + 1)
        - np.array([math.lgamma(k + 1) + math.lgamma(m - k + 1) for k in ks])
    )
    return np.exp(logc + ks * math.log(p) + (m - ks) * math.log1p(-p))


def evaluate_over_bsec(code_n: int, dmin: int, dense, p: BsecParams) -> BsecSummary:
    """Sum decoder-outcome statistics against the (i, j) distribution induced
    by a BSEC (or a density-evolution message triple)."""
    mu, lam, cov = dense
    n = code_n
    alpha, beta, gamma = p.p0, p.p1, p.pe

    correct = miscorrect = failure = ber = uncovered = 0.0
    pj_all = _binom_pmf(n, gamma)

    for j in range(min(dmin, n + 1)):
        pj = pj_all[j]
        if pj == 0.0:
            continue
        rest = n - j
        cond = beta / (1.0 - gamma) if gamma < 1.0 else 0.0
        pi = pj * _binom_pmf(rest, cond)
        thr = max(0, math.ceil((dmin - j) / 2))  # first i with 2i+j >= dmin
        correct += float(pi[:thr].sum())
        if thr > rest:
            continue
        ivec = np.arange(thr, rest + 1)
        f = pi[thr:]
        covered = cov[j, thr: rest + 1]
        mu_v = mu[j, thr: rest + 1]
        lam_v = lam[j, thr: rest + 1]
        fc = np.where(covered, f, 0.0)
        uncovered += float(f.sum() - fc.sum())
        failure += float((fc * lam_v).sum())
        miscorrect += float((fc * mu_v).sum())
        correct += float((fc * (1.0 - mu_v - lam_v)).sum())
        ber += float((fc * (mu_v + lam_v * (ivec / n + j / (2.0 * n)))).sum())

    # j >= dmin: decoding always fails; conditional mean of i is linear
    if dmin <= n:
        jv = np.arange(dmin, n + 1)
        pj = pj_all[dmin:]
        cond = beta / (1.0 - gamma) if gamma < 1.0 else 0.0
        failure_tail = float(pj.sum())
        failure += failure_tail
        ber += float((pj * ((n - jv) * cond / n + jv / (2.0 * n))).sum())

    return BsecSummary(correct, miscorrect, failure, ber, uncovered)


@dataclass(frozen=True)
class BerEstimate:
    ber: float
    truncated_mass: float  # worst-case remainder from uncovered cells

    def __float__(self) -> float:
        return self.ber


def bch_ber_over_bsec(code: BchCode, table: MuLambdaTable, p: BsecParams,
                      tail_bound: float = 1e-20) -> BerEstimate:
    """Analytic BER of one bounded-distance decode over a BSEC, summing
    P_{i,j} [mu + lambda (i/n + j/2n)] with table-driven cell statistics.

    Cells without samples may carry at most `tail_bound` total probability;
    their mass is reported as a separate worst-case remainder.
    """
    if not table.matches(code):
        raise TableIntegrityError("table was built for a different code")
    summary = evaluate_over_bsec(code.n, code.dmin, table.dense(), p)
    if summary.uncovered > tail_bound:
        raise TableCoverageError(
            f"uncovered cells carry {summary.uncovered:.3e} probability "
            f"(> tail bound {tail_bound:.1e}); extend the table",
            triple=p,
        )
    return BerEstimate(summary.ber, summary.uncovered)
