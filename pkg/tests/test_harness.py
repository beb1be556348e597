import math

import numpy as np
import pytest

from bmstbch.bch import construct_bch
from bmstbch.bounds import channel_at, genie_lower_bound
from bmstbch.channel import BsecParams
from bmstbch.codec import RealNodeC
from bmstbch.harness import (
    ExperimentSpec,
    TableNodeC,
    code_search,
    decoding_latency,
    genie_single_layer,
    run_table_emulated,
    run_traditional,
    write_csv,
)
from bmstbch.tables import build_table
from bmstbch.ternary import ERASE


@pytest.fixture(scope="module")
def code15():
    return construct_bch(4, 5, 0)


@pytest.fixture(scope="module")
def table15(code15):
    return build_table(code15, 20_000, seed=12)


def small_spec(**kw):
    args = dict(q=4, dmin=5, shorten_by=0, B=16, m=2, d=4, L=10,
                ebn0_grid_db=[4.0], mode="hdd", min_bit_errors=30,
                max_info_bits=200_000, seed=42)
    args.update(kw)
    return ExperimentSpec(**args)


class TestSpecValidation:
    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            small_spec(ebn0_grid_db=[4.0, 3.0])

    def test_positive_stopping(self):
        with pytest.raises(ValueError):
            small_spec(min_bit_errors=0)

    def test_mode_checked(self):
        with pytest.raises(ValueError):
            small_spec(mode="llr")


class TestRunTraditional:
    def test_noiseless_override(self):
        spec = small_spec(ebn0_grid_db=[30.0], min_bit_errors=1,
                          max_info_bits=20_000)
        pts = run_traditional(spec)
        assert pts[0].ber == 0.0
        assert pts[0].bit_errors == 0

    def test_reproducible(self):
        spec = small_spec(ebn0_grid_db=[3.5])
        a = run_traditional(spec)
        b = run_traditional(spec)
        assert a == b

    def test_bit_conservation(self, code15):
        spec = small_spec()
        pts = run_traditional(spec)
        pt = pts[0]
        assert pt.bits_sent == pt.frames * code15.k * spec.B * spec.L

    def test_csv_round_trip(self, tmp_path):
        spec = small_spec(ebn0_grid_db=[30.0], min_bit_errors=1,
                          max_info_bits=20_000)
        pts = run_traditional(spec)
        path = tmp_path / "pts.csv"
        write_csv(pts, path)
        text = path.read_text().splitlines()
        assert text[0].startswith("ebn0_db,ber,fer")
        assert len(text) == 2


class TestEmulatedEngine:
    def test_within_radius_matches_real_exactly(self, code15, table15):
        rng = np.random.default_rng(0)
        truth = code15.encode_block(
            rng.integers(0, 2, (8, code15.k), dtype=np.uint8)
        )[None, :, :]
        engine = TableNodeC(code15, table15, truth, np.random.default_rng(1))
        real = RealNodeC(code15)
        block = truth[0].ravel().copy()
        block[:2] ^= 1  # one word, two flips: inside the radius
        out_e, ok_e, words_e = engine.decode(0, block)
        out_r, ok_r, words_r = real.decode(0, block)
        assert ok_e.all() and ok_r.all()
        assert np.array_equal(out_e, out_r)
        assert np.array_equal(words_e, words_r)

    def test_certain_failure_region(self, code15, table15):
        rng = np.random.default_rng(2)
        truth = code15.encode_block(
            rng.integers(0, 2, (2, code15.k), dtype=np.uint8)
        )[None, :, :]
        engine = TableNodeC(code15, table15, truth, np.random.default_rng(3))
        block = truth[0].ravel().copy()
        block[: code15.dmin] = ERASE  # dmin erasures: guaranteed failure
        out, ok, _ = engine.decode(0, block)
        assert not ok[0]
        assert (out[: code15.n] == ERASE).all()
        assert ok[1]

    def test_curves_agree_with_real(self, table15):
        spec = small_spec(ebn0_grid_db=[3.8, 4.2], B=32, L=12,
                          min_bit_errors=60, max_info_bits=600_000)
        real = run_traditional(spec)
        emu = run_table_emulated(spec, table15)
        for a, b in zip(real, emu):
            assert not (a.ci_high < b.ci_low or b.ci_high < a.ci_low)

    def test_emulated_reproducible(self, table15):
        spec = small_spec(ebn0_grid_db=[4.0])
        a = run_table_emulated(spec, table15)
        b = run_table_emulated(spec, table15)
        assert a == b


class TestWorkers:
    def test_worker_count_does_not_change_results(self, table15):
        spec = small_spec(ebn0_grid_db=[4.0], min_bit_errors=20,
                          max_info_bits=100_000)
        serial = run_traditional(spec, workers=1)
        parallel = run_traditional(spec, workers=2)
        for a, b in zip(serial, parallel):
            assert (a.ber, a.bits_sent, a.bit_errors) == (b.ber, b.bits_sent, b.bit_errors)


class TestGenieSingleLayer:
    def test_clean_channel(self, code15):
        ber, se = genie_single_layer(
            code15, BsecParams(1, 0, 0), 2, 2000, np.random.default_rng(4)
        )
        assert ber == 0.0

    def test_memoryless_matches_single_decode_bound(self, code15, table15):
        p = BsecParams(0.93, 0.05, 0.02)
        bound = genie_lower_bound(code15, table15, p, 0)
        ber, se = genie_single_layer(code15, p, 0, 150_000,
                                     np.random.default_rng(5))
        assert abs(ber - bound.ber) < 3 * se

    def test_memory_two_matches_bound(self, code15, table15):
        p = channel_at(3.5, code15.k / code15.n, "hdd")
        bound = genie_lower_bound(code15, table15, p, 2)
        ber, se = genie_single_layer(code15, p, 2, 200_000,
                                     np.random.default_rng(6))
        assert abs(ber - bound.ber) < 3 * se


class TestLatency:
    def test_reproduces_reference_latencies(self):
        assert decoding_latency(378, 168, 6) == 444_528
        assert decoding_latency(324, 144, 6) == 326_592
        assert decoding_latency(105, 375, 8) == 354_375


class TestCodeSearch:
    def test_infeasible_overhead_is_empty(self):
        out = code_search(0.001, 1000, 1e-15, rank_by_de=False,
                          q_range=[5, 6], dmin_range=[5, 7],
                          samples_per_cell=500)
        assert out == []

    def test_oh_sixth_hdd_candidate(self):
        cands = code_search(1 / 6, 444_528, 1e-15, mode="hdd",
                            q_range=[9], dmin_range=[13],
                            samples_per_cell=4000, rank_by_de=False)
        assert len(cands) == 1
        c = cands[0]
        assert (c.n, c.k, c.dmin) == (378, 324, 13)
        assert c.m == 3
        assert c.B == 168
        assert c.latency == 444_528

    def test_oh_quarter_sdd_candidate(self):
        cands = code_search(0.25, 354_375, 1e-15, mode="sdd",
                            q_range=[7], dmin_range=[7],
                            samples_per_cell=4000, rank_by_de=False)
        assert len(cands) == 1
        c = cands[0]
        assert (c.n, c.k, c.dmin) == (105, 84, 7)
        assert c.m == 4
        assert c.B == 375
        assert c.latency == 354_375
