"""BPSK over AWGN quantized to three levels: a binary symmetric erasure
channel (BSEC) with parameters (p0, p1, pe), plus the mutual-information
criterion for picking the erasure threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erfc

from .ternary import ERASE


def q_function(x: float) -> float:
    """Gaussian tail probability Q(x) = 0.5 erfc(x / sqrt(2))."""
    return 0.5 * erfc(x / math.sqrt(2.0))


@dataclass(frozen=True)
class BsecParams:
    """(p0, p1, pe): probabilities of a bit arriving correct, flipped or
    erased.  Also reused as the message densities of density evolution."""

    p0: float
    p1: float
    pe: float

    def __post_init__(self):
        for v in (self.p0, self.p1, self.pe):
            if not -1e-12 <= v <= 1 + 1e-12:
                raise ValueError(f"probability {v} outside [0, 1]")
        if abs(self.p0 + self.p1 + self.pe - 1.0) > 1e-12:
            raise ValueError(
                f"probabilities sum to {self.p0 + self.p1 + self.pe}, not 1"
            )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p0, self.p1, self.pe)


def sigma_from_ebn0(ebn0_db: float, rate: float) -> float:
    """Noise standard deviation for unit-energy BPSK at a given Eb/N0."""
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def bsec_from(sigma: float, threshold: float) -> BsecParams:
    """Channel parameters of the three-level quantizer at threshold T >= 0."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    qa = q_function((1.0 - threshold) / sigma)
    qb = q_function((1.0 + threshold) / sigma)
    return BsecParams(p0=1.0 - qa, p1=qb, pe=qa - qb)


def _xlog2(v: float) -> float:
    return v * math.log2(v) if v > 0.0 else 0.0


def mutual_information(p: BsecParams) -> float:
    """MI in bits of the BSEC with a uniform binary input."""
    tail = 0.0
    if p.pe < 1.0:
        tail = (1.0 - p.pe) * math.log2((1.0 - p.pe) / 2.0)
    return _xlog2(p.p0) + _xlog2(p.p1) - tail


def optimize_threshold(sigma: float) -> tuple[float, BsecParams]:
    """Threshold T* >= 0 maximizing the BSEC mutual information.

    Coarse grid then bounded golden-section refinement; T = 0 is always in
    the feasible set, so the result never loses to the hard decision.
    """
    t_hi = 1.0 + 3.0 * sigma
    grid = np.linspace(0.0, t_hi, 201)
    mis = [mutual_information(bsec_from(sigma, t)) for t in grid]
    best = int(np.argmax(mis))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    res = minimize_scalar(
        lambda t: -mutual_information(bsec_from(sigma, t)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-6},
    )
    t_star = float(res.x)
    if mutual_information(bsec_from(sigma, t_star)) < mis[0]:
        t_star = 0.0
    return t_star, bsec_from(sigma, t_star)


@dataclass(frozen=True)
class ChannelConfig:
    """Operating point: Eb/N0 in dB, overall rate, and quantizer threshold."""

    ebn0_db: float
    rate: float
    threshold: float = 0.0
    sigma: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sigma", sigma_from_ebn0(self.ebn0_db, self.rate))

    @classmethod
    def hdd(cls, ebn0_db: float, rate: float) -> "ChannelConfig":
        return cls(ebn0_db, rate, threshold=0.0)

    @classmethod
    def sdd(cls, ebn0_db: float, rate: float) -> "ChannelConfig":
        sigma = sigma_from_ebn0(ebn0_db, rate)
        t_star, _ = optimize_threshold(sigma)
        return cls(ebn0_db, rate, threshold=t_star)

    def bsec(self) -> BsecParams:
        return bsec_from(self.sigma, self.threshold)


def transmit(bits: np.ndarray, config: ChannelConfig,
             rng: np.random.Generator) -> np.ndarray:
    """Send bits through BPSK + AWGN + three-level quantizer.

    Returns a ternary array: correct bit, flipped bit, or ERASE, each
    position independent with probabilities (p0, p1, pe).
    """
    bits = np.asarray(bits, dtype=np.uint8)
    symbols = 1.0 - 2.0 * bits.astype(np.float64)  # 0 -> +1, 1 -> -1
    z = symbols + config.sigma * rng.standard_normal(bits.shape)
    out = np.full(bits.shape, ERASE, dtype=np.uint8)
    np.copyto(out, 0, where=z > config.threshold)
    np.copyto(out, 1, where=z < -config.threshold)
    return out
