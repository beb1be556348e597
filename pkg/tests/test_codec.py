import itertools

import numpy as np
import pytest

from bmstbch.bch import construct_bch
from bmstbch.channel import ChannelConfig, transmit
from bmstbch.codec import (
    BmstConfig,
    RealNodeC,
    bmst_encode,
    node_C_update,
    node_equal_to_C,
    node_equal_to_pi,
    node_plus_update,
    sliding_window_decode,
)
from bmstbch.ternary import ERASE, box_plus, ternary, vote


@pytest.fixture(scope="module")
def code15():
    return construct_bch(4, 5, 0)


def make_config(code, **kw):
    args = dict(code=code, B=4, m=2, L=8, d=4, imax=15, seed=5)
    args.update(kw)
    return BmstConfig(**args)


class TestBoxPlus:
    def test_full_table(self):
        # 0/1 behave like GF(2) addition, erasure absorbs
        for a, b in itertools.product([0, 1, ERASE], repeat=2):
            got = int(box_plus(np.array([a]), np.array([b]))[0])
            expected = ERASE if ERASE in (a, b) else a ^ b
            assert got == expected

    def test_algebra(self):
        syms = [0, 1, ERASE]
        for a, b in itertools.product(syms, repeat=2):
            x = int(box_plus(np.array([a]), np.array([b]))[0])
            y = int(box_plus(np.array([b]), np.array([a]))[0])
            assert x == y
        for a, b, c in itertools.product(syms, repeat=3):
            ab_c = box_plus(box_plus(np.array([a]), np.array([b])), np.array([c]))
            a_bc = box_plus(np.array([a]), box_plus(np.array([b]), np.array([c])))
            assert ab_c[0] == a_bc[0]
        for a in syms:
            assert int(box_plus(np.array([a]), np.array([0]))[0]) == a


class TestNodeRules:
    def test_plus_extrinsic(self):
        ins = [ternary("0"), ternary("0"), ternary("0"), ternary("1")]
        outs = node_plus_update(ins)
        assert [int(o[0]) for o in outs] == [1, 1, 1, 0]

    def test_plus_erasure_spreads(self):
        ins = [ternary("e"), ternary("0"), ternary("1")]
        outs = node_plus_update(ins)
        assert int(outs[0][0]) == 1      # the two non-erased edges combine
        assert int(outs[1][0]) == ERASE  # every other edge sees the erasure
        assert int(outs[2][0]) == ERASE

    def test_plus_zero(self):
        ins = [ternary("0")] * 4
        assert all(int(o[0]) == 0 for o in node_plus_update(ins))

    def test_plus_shared_sum_path_equivalent(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            blocks = [rng.integers(0, 3, 50).astype(np.uint8)
                      for _ in range(int(rng.integers(1, 7)))]
            naive = node_plus_update(blocks, use_partial_sums=False)
            shared = node_plus_update(blocks, use_partial_sums=True)
            for a, b in zip(naive, shared):
                assert np.array_equal(a, b)

    def test_vote_to_c(self):
        assert int(node_equal_to_C([ternary("0"), ternary("0"), ternary("1")])[0]) == 0
        assert int(node_equal_to_C([ternary("0"), ternary("1")])[0]) == ERASE
        assert int(node_equal_to_C([ternary("e"), ternary("e"), ternary("e")])[0]) == ERASE

    def test_vote_to_pi_pass_through(self):
        out = node_equal_to_pi(ternary("1"), [ternary("0"), ternary("0")])
        assert int(out[0]) == 1

    def test_vote_to_pi_votes_on_erasure(self):
        out = node_equal_to_pi(ternary("e"), [ternary("0"), ternary("0")])
        assert int(out[0]) == 0
        out = node_equal_to_pi(ternary("e"), [ternary("0"), ternary("1")])
        assert int(out[0]) == ERASE

    def test_node_c(self, code15):
        rng = np.random.default_rng(1)
        words = code15.encode_block(rng.integers(0, 2, (3, code15.k), dtype=np.uint8))
        block = words.ravel().astype(np.uint8).copy()
        # word 1 gets an undecodable mess: dmin erasures plus flips
        block[code15.n: code15.n + 10] = ERASE
        block[code15.n + 10: code15.n + 13] ^= 1
        out = node_C_update(code15, block)
        words_out = out.reshape(3, code15.n)
        assert np.array_equal(words_out[0], words[0])
        assert (words_out[1] == ERASE).all()
        assert np.array_equal(words_out[2], words[2])


class TestEncoder:
    def test_shapes_and_rate(self, code15):
        cfg = make_config(code15)
        rng = np.random.default_rng(2)
        data = rng.integers(0, 2, (cfg.L, cfg.kB), dtype=np.uint8)
        out = bmst_encode(cfg, data)
        assert out.shape == (cfg.L + cfg.m, cfg.nB)
        assert cfg.rate == pytest.approx(
            code15.k * cfg.L / (code15.n * (cfg.L + cfg.m))
        )

    def test_zero_data(self, code15):
        cfg = make_config(code15)
        assert not bmst_encode(cfg, np.zeros((cfg.L, cfg.kB), np.uint8)).any()

    def test_linearity(self, code15):
        cfg = make_config(code15)
        rng = np.random.default_rng(3)
        a = rng.integers(0, 2, (cfg.L, cfg.kB), dtype=np.uint8)
        b = rng.integers(0, 2, (cfg.L, cfg.kB), dtype=np.uint8)
        assert np.array_equal(
            bmst_encode(cfg, a ^ b), bmst_encode(cfg, a) ^ bmst_encode(cfg, b)
        )

    def test_memoryless_identity_interleaver(self, code15):
        # m = 0 with the identity permutation degenerates to plain
        # independent component encoding
        ident = np.arange(code15.n * 4)[None, :]
        cfg = make_config(code15, m=0, d=0, interleavers=ident)
        rng = np.random.default_rng(4)
        data = rng.integers(0, 2, (cfg.L, cfg.kB), dtype=np.uint8)
        out = bmst_encode(cfg, data)
        for t in range(cfg.L):
            direct = code15.encode_block(data[t].reshape(4, code15.k)).ravel()
            assert np.array_equal(out[t], direct)

    def test_interleavers_are_bijections(self, code15):
        cfg = make_config(code15)
        for perm in cfg.interleavers:
            assert sorted(perm) == list(range(cfg.nB))


class TestSlidingWindowDecode:
    def test_noiseless_early_exit(self, code15):
        cfg = make_config(code15)
        rng = np.random.default_rng(5)
        data = rng.integers(0, 2, (cfg.L, cfg.kB), dtype=np.uint8)
        coded = bmst_encode(cfg, data)
        res = sliding_window_decode(cfg, coded, np.random.default_rng(0))
        assert (res.info_bits == data).all()
        assert (res.iterations == 2).all()
        assert res.word_success.all()

    def test_memoryless_equals_component_decoding(self, code15):
        ident = np.arange(code15.n * 4)[None, :]
        cfg = make_config(code15, m=0, d=0, interleavers=ident)
        rng = np.random.default_rng(6)
        data = rng.integers(0, 2, (cfg.L, cfg.kB), dtype=np.uint8)
        coded = bmst_encode(cfg, data)
        noisy = coded.copy()
        noisy[0, 1] ^= 1  # single flip, always corrected
        res = sliding_window_decode(cfg, noisy, np.random.default_rng(0))
        direct, ok = code15.decode_block(noisy[0].reshape(4, code15.n))
        assert ok.all()
        assert np.array_equal(
            res.info_bits[0].reshape(4, code15.k),
            direct[:, code15.systematic],
        )
        assert (res.info_bits[1:] == data[1:]).all()

    def test_partial_sums_flag_is_output_equivalent(self, code15):
        cfg_a = make_config(code15)
        cfg_b = make_config(code15, use_partial_sums=True)
        rng = np.random.default_rng(7)
        data = rng.integers(0, 2, (cfg_a.L, cfg_a.kB), dtype=np.uint8)
        coded = bmst_encode(cfg_a, data)
        chan = ChannelConfig(4.0, cfg_a.rate, threshold=0.1)
        y = transmit(coded.ravel(), chan, rng).reshape(coded.shape)
        ra = sliding_window_decode(cfg_a, y, np.random.default_rng(1))
        rb = sliding_window_decode(cfg_b, y, np.random.default_rng(1))
        assert np.array_equal(ra.info_bits, rb.info_bits)
        assert np.array_equal(ra.iterations, rb.iterations)

    def test_decided_words_are_codewords(self, code15):
        cfg = make_config(code15)
        rng = np.random.default_rng(8)
        data = rng.integers(0, 2, (cfg.L, cfg.kB), dtype=np.uint8)
        coded = bmst_encode(cfg, data)
        chan = ChannelConfig(2.5, cfg.rate, threshold=0.15)
        y = transmit(coded.ravel(), chan, rng).reshape(coded.shape)
        res = sliding_window_decode(cfg, y, np.random.default_rng(2))
        for layer in res.decided_words:
            for word in layer:
                assert code15.is_codeword(word)

    def test_deterministic(self, code15):
        cfg = make_config(code15)
        rng = np.random.default_rng(9)
        data = rng.integers(0, 2, (cfg.L, cfg.kB), dtype=np.uint8)
        coded = bmst_encode(cfg, data)
        chan = ChannelConfig(3.0, cfg.rate, threshold=0.1)
        y = transmit(coded.ravel(), chan, rng).reshape(coded.shape)
        r1 = sliding_window_decode(cfg, y, np.random.default_rng(3))
        r2 = sliding_window_decode(cfg, y, np.random.default_rng(3))
        assert np.array_equal(r1.info_bits, r2.info_bits)

    def test_cancelation_semantics(self):
        # box-plus cancelation: zero word leaves the block alone, binary
        # word flips exactly the non-erased positions
        y = ternary("01e1")
        w_zero = ternary("0000")
        assert np.array_equal(box_plus(y, w_zero), y)
        w = ternary("1100")
        out = box_plus(y, w)
        assert np.array_equal(out, ternary("10e1"))


class TestConfigValidation:
    def test_l_must_exceed_memory(self, code15):
        with pytest.raises(ValueError):
            make_config(code15, L=2, m=2)

    def test_wrong_data_shape(self, code15):
        cfg = make_config(code15)
        with pytest.raises(ValueError):
            bmst_encode(cfg, np.zeros((cfg.L, cfg.kB + 1), np.uint8))

    def test_wrong_received_shape(self, code15):
        cfg = make_config(code15)
        with pytest.raises(ValueError):
            sliding_window_decode(
                cfg, np.zeros((cfg.L, cfg.nB), np.uint8), np.random.default_rng(0)
            )


class TestRealNodeC:
    def test_independent_words(self, code15):
        rng = np.random.default_rng(10)
        engine = RealNodeC(code15)
        words = code15.encode_block(rng.integers(0, 2, (4, code15.k), dtype=np.uint8))
        block = words.ravel().copy()
        block[3] ^= 1
        out, success, decoded = engine.decode(0, block)
        assert success.all()
        assert np.array_equal(decoded, words)
