import math

import numpy as np
import pytest

from bmstbch.channel import (
    BsecParams,
    ChannelConfig,
    bsec_from,
    mutual_information,
    optimize_threshold,
    q_function,
    sigma_from_ebn0,
    transmit,
)
from bmstbch.ternary import ERASE


class TestQFunction:
    def test_half_at_zero(self):
        assert q_function(0.0) == pytest.approx(0.5)

    def test_deep_tail(self):
        assert q_function(10.0) < 1e-23

    def test_against_erfc_value(self):
        assert q_function(1.0) == pytest.approx(0.1586552539, abs=1e-9)

    def test_monotone(self):
        xs = np.linspace(-3, 5, 50)
        qs = [q_function(x) for x in xs]
        assert all(a > b for a, b in zip(qs, qs[1:]))


class TestBsecParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            BsecParams(0.5, 0.4, 0.2)
        with pytest.raises(ValueError):
            BsecParams(1.2, -0.2, 0.0)

    def test_hard_decision_has_no_erasures(self):
        p = bsec_from(0.5, 0.0)
        assert p.pe == 0.0
        assert p.p1 == pytest.approx(q_function(2.0))

    def test_noiseless_limit(self):
        p = bsec_from(1e-3, 0.5)
        assert p.p0 == pytest.approx(1.0)
        assert p.p1 == pytest.approx(0.0, abs=1e-12)
        assert p.pe == pytest.approx(0.0, abs=1e-12)

    def test_sum_to_one(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            sigma = float(rng.uniform(0.05, 3.0))
            t = float(rng.uniform(0.0, 2.0))
            p = bsec_from(sigma, t)
            assert p.p0 + p.p1 + p.pe == pytest.approx(1.0, abs=1e-12)

    def test_p1_decreases_with_threshold(self):
        sigma = 0.8
        p1s = [bsec_from(sigma, t).p1 for t in np.linspace(0, 1.5, 20)]
        assert all(a >= b for a, b in zip(p1s, p1s[1:]))


class TestMutualInformation:
    def test_clean(self):
        assert mutual_information(BsecParams(1, 0, 0)) == pytest.approx(1.0)

    def test_useless_bsc(self):
        assert mutual_information(BsecParams(0.5, 0.5, 0)) == pytest.approx(0.0)

    def test_pure_erasure(self):
        assert mutual_information(BsecParams(0.5, 0, 0.5)) == pytest.approx(0.5)


class TestOptimizeThreshold:
    def test_never_worse_than_hard_decision(self):
        for sigma in [0.3, 0.6, 0.9, 1.5]:
            t_star, p = optimize_threshold(sigma)
            assert t_star >= 0.0
            assert mutual_information(p) >= mutual_information(bsec_from(sigma, 0.0)) - 1e-12

    def test_against_dense_grid(self):
        sigma = 0.7
        t_star, _ = optimize_threshold(sigma)
        grid = np.arange(0.0, 1.0, 1e-5)
        mis = [mutual_information(bsec_from(sigma, t)) for t in grid]
        t_brute = grid[int(np.argmax(mis))]
        assert abs(t_star - t_brute) < 1e-4

    def test_clean_limit_reaches_capacity(self):
        _, p = optimize_threshold(1e-3)
        assert mutual_information(p) == pytest.approx(1.0, abs=1e-9)


class TestTransmit:
    def test_tiny_noise_is_identity(self):
        rng = np.random.default_rng(1)
        bits = rng.integers(0, 2, 1000, dtype=np.uint8)
        cfg = ChannelConfig(30.0, 0.5, threshold=0.1)
        out = transmit(bits, cfg, rng)
        assert np.array_equal(out, bits)

    def test_hard_decision_never_erases(self):
        rng = np.random.default_rng(2)
        bits = rng.integers(0, 2, 100_000, dtype=np.uint8)
        out = transmit(bits, ChannelConfig.hdd(2.0, 0.5), rng)
        assert not (out == ERASE).any()

    def test_symbol_frequencies(self):
        rng = np.random.default_rng(3)
        n = 1_000_000
        bits = rng.integers(0, 2, n, dtype=np.uint8)
        cfg = ChannelConfig(3.0, 0.5, threshold=0.2)
        p = cfg.bsec()
        out = transmit(bits, cfg, rng)
        correct = float((out == bits).sum()) / n
        flipped = float(((out == (bits ^ 1)) & (out != ERASE)).sum()) / n
        erased = float((out == ERASE).sum()) / n
        for observed, expected in [(correct, p.p0), (flipped, p.p1), (erased, p.pe)]:
            se = math.sqrt(expected * (1 - expected) / n)
            assert abs(observed - expected) < 3 * se + 1e-9

    def test_sigma_conversion(self):
        cfg = ChannelConfig(0.0, 0.5)
        assert cfg.sigma == pytest.approx(1.0)
        assert sigma_from_ebn0(10.0, 1.0) == pytest.approx(math.sqrt(1 / 20))

    def test_sdd_uses_optimized_threshold(self):
        cfg = ChannelConfig.sdd(3.0, 0.5)
        t_star, _ = optimize_threshold(cfg.sigma)
        assert cfg.threshold == pytest.approx(t_star, abs=1e-9)
