import numpy as np
import pytest

from bmstbch.bch import BchConstructionError, bch_from_params, construct_bch
from bmstbch.galois import BinaryPolynomial
from bmstbch.ternary import ERASE


@pytest.fixture(scope="module")
def code15():
    return construct_bch(4, 5, 0)


@pytest.fixture(scope="module")
def code31():
    return construct_bch(5, 7, 0)


class TestConstruction:
    def test_known_parameter_sets(self):
        assert construct_bch(5, 7, 0).params == (31, 16, 7)
        assert construct_bch(7, 7, 1).params == (126, 105, 7)
        assert construct_bch(4, 5, 0).params == (15, 7, 5)

    def test_generator_divides_parent_cycle(self, code31):
        xn1 = BinaryPolynomial((1 << code31.parent_n) | 1)
        assert (xn1 % code31.generator).bits == 0

    def test_codeword_roots(self, code15):
        f = code15.field
        rng = np.random.default_rng(0)
        cw = code15.encode(rng.integers(0, 2, code15.k, dtype=np.uint8))
        for power in range(1, code15.dmin):
            acc = 0
            for pos in np.nonzero(cw)[0]:
                acc ^= f.pow(f.alpha(1), int(power * pos))
            assert acc == 0

    def test_even_dmin_rejected(self):
        with pytest.raises(BchConstructionError):
            construct_bch(5, 6, 0)

    def test_overshortening_rejected(self):
        with pytest.raises(BchConstructionError):
            construct_bch(4, 5, 7)

    def test_from_params_resolves_paper_codes(self):
        for n, k, dmin in [(324, 270, 13), (378, 324, 13), (105, 84, 7),
                           (98, 84, 5), (216, 180, 9), (660, 550, 23)]:
            code = bch_from_params(n, k, dmin)
            assert code.params == (n, k, dmin)

    def test_from_params_flags_inconsistent_triple(self):
        with pytest.raises(BchConstructionError, match="inconsistent"):
            bch_from_params(270, 180, 11)


class TestEncode:
    def test_zero_maps_to_zero(self, code15):
        assert not code15.encode(np.zeros(code15.k, dtype=np.uint8)).any()

    def test_systematic(self, code31):
        rng = np.random.default_rng(3)
        info = rng.integers(0, 2, code31.k, dtype=np.uint8)
        cw = code31.encode(info)
        assert np.array_equal(cw[code31.systematic], info)

    def test_minimum_weight(self, code15):
        info = np.zeros(code15.k, dtype=np.uint8)
        info[0] = 1
        assert code15.encode(info).sum() >= code15.dmin

    def test_length_mismatch(self, code15):
        with pytest.raises(ValueError):
            code15.encode(np.zeros(code15.k + 1, dtype=np.uint8))

    def test_all_encodes_are_codewords(self, code15):
        rng = np.random.default_rng(4)
        block = code15.encode_block(
            rng.integers(0, 2, (20, code15.k), dtype=np.uint8)
        )
        for cw in block:
            assert code15.is_codeword(cw)


def corrupt(cw, flips, erasures, rng):
    r = cw.copy()
    pos = rng.choice(len(cw), size=flips + erasures, replace=False)
    for p in pos[:flips]:
        r[p] ^= 1
    for p in pos[flips:]:
        r[p] = ERASE
    return r


class TestDecode:
    def test_clean_codeword(self, code31):
        rng = np.random.default_rng(5)
        cw = code31.encode(rng.integers(0, 2, code31.k, dtype=np.uint8))
        out = code31.decode_ee(cw)
        assert out.success and np.array_equal(out.codeword, cw)

    def test_three_flips_within_radius(self, code31):
        rng = np.random.default_rng(6)
        for _ in range(200):
            cw = code31.encode(rng.integers(0, 2, code31.k, dtype=np.uint8))
            out = code31.decode_ee(corrupt(cw, 3, 0, rng))
            assert out.success and np.array_equal(out.codeword, cw)

    def test_six_erasures_succeed(self, code31):
        rng = np.random.default_rng(7)
        for _ in range(200):
            cw = code31.encode(rng.integers(0, 2, code31.k, dtype=np.uint8))
            out = code31.decode_ee(corrupt(cw, 0, 6, rng))
            assert out.success and np.array_equal(out.codeword, cw)

    def test_seven_erasures_fail_or_miscorrect(self, code31):
        rng = np.random.default_rng(8)
        for _ in range(200):
            cw = code31.encode(rng.integers(0, 2, code31.k, dtype=np.uint8))
            out = code31.decode_ee(corrupt(cw, 0, 7, rng))
            if out.success:
                assert code31.is_codeword(out.codeword)

    def test_returned_codewords_reencode(self, code31):
        rng = np.random.default_rng(9)
        for _ in range(300):
            cw = code31.encode(rng.integers(0, 2, code31.k, dtype=np.uint8))
            out = code31.decode_ee(corrupt(cw, 4, 2, rng))
            if out.success:
                again = code31.encode(out.codeword[code31.systematic])
                assert np.array_equal(again, out.codeword)

    def test_shortened_matches_parent_with_pinned_zeros(self):
        short = construct_bch(5, 7, 4)   # [27,12,7]
        parent = construct_bch(5, 7, 0)  # [31,16,7]
        rng = np.random.default_rng(10)
        for _ in range(100):
            cw = short.encode(rng.integers(0, 2, short.k, dtype=np.uint8))
            r = corrupt(cw, 2, 2, rng)
            embedded = np.zeros(parent.n, dtype=np.uint8)
            embedded[: short.n] = r
            a = short.decode_ee(r)
            b = parent.decode_ee(embedded)
            assert a.success and b.success
            assert np.array_equal(a.codeword, b.codeword[: short.n])
            assert not b.codeword[short.n:].any()

    def test_block_decode_matches_single(self, code31):
        rng = np.random.default_rng(11)
        words = []
        cws = []
        for _ in range(64):
            cw = code31.encode(rng.integers(0, 2, code31.k, dtype=np.uint8))
            words.append(corrupt(cw, int(rng.integers(0, 5)),
                                 int(rng.integers(0, 4)), rng))
            cws.append(cw)
        block = np.stack(words)
        decoded, ok = code31.decode_block(block)
        for w, d, s in zip(words, decoded, ok):
            single = code31.decode_ee(w)
            assert single.success == s
            if s:
                assert np.array_equal(single.codeword, d)

    def test_length_check(self, code15):
        with pytest.raises(ValueError):
            code15.decode_ee(np.zeros(code15.n + 1, dtype=np.uint8))
