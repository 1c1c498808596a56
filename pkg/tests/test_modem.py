import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from ccsk.chaos import MapKind, Segment, iterate
from ccsk.modem import (
    ChaoticModulator,
    ModemConfig,
    SymbolMapTable,
    bits_to_symbols,
    combine_sequence,
    gray_decode,
    gray_encode,
    gray_map,
    modulate,
    symbol_to_position,
    symbols_to_bits,
)
from ccsk.validation import ParameterError


class TestModemConfig:
    def test_default_beta(self):
        cfg = ModemConfig(4, 32)
        assert cfg.beta == 128 and cfg.window == 32 and cfg.bits_per_symbol == 2

    def test_wide_frame(self):
        cfg = ModemConfig(2, 32, 512)
        assert cfg.window == 256

    @pytest.mark.parametrize("M,k,beta", [(3, 32, None), (0, 4, None), (4, 1, None),
                                          (4, 32, 100), (4, 32, 64), (8, 32, 96)])
    def test_rejects(self, M, k, beta):
        with pytest.raises(ParameterError):
            ModemConfig(M, k, beta)


class TestGray:
    @pytest.mark.parametrize("word,symbol", [((0, 0), 0), ((0, 1), 1), ((1, 1), 2), ((1, 0), 3)])
    def test_m4_table(self, word, symbol):
        assert gray_map(word, 4) == symbol

    def test_m8(self):
        assert gray_map((1, 1, 0), 8) == 4

    def test_all_words_round_trip_m256(self):
        words = [tuple((v >> (7 - i)) & 1 for i in range(8)) for v in range(256)]
        assert all(gray_map(gray_map(w, 256), 256, "decode") == w for w in words)
        assert sorted(gray_map(w, 256) for w in words) == list(range(256))

    def test_neighbours_differ_in_one_bit(self):
        codes = gray_encode(np.arange(256))
        assert all(bin(int(a) ^ int(b)).count("1") == 1 for a, b in zip(codes[1:], codes[:-1]))

    @given(st.integers(0, 2**40))
    def test_decode_inverts_encode(self, v):
        assert gray_decode(gray_encode(v)) == v

    def test_bad_word_length(self):
        with pytest.raises(ParameterError):
            gray_map((1, 0, 1), 4)
        with pytest.raises(ParameterError):
            gray_map(4, 4, "decode")
        with pytest.raises(ParameterError):
            gray_map((0, 1), 4, "sideways")


class TestSymbolTable:
    def test_identity(self):
        t = SymbolMapTable.identity(4)
        assert symbol_to_position(0, t) == 1
        assert symbol_to_position(3, t) == 4

    def test_permuted(self):
        t = SymbolMapTable(4, (3, 1, 4, 2))
        assert symbol_to_position(0, t) == 3
        np.testing.assert_array_equal(t.c_to_symbol[t.symbol_to_c - 1], np.arange(4))

    def test_out_of_range(self):
        with pytest.raises(ParameterError):
            symbol_to_position(4, SymbolMapTable.identity(4))

    def test_not_a_permutation(self):
        with pytest.raises(ParameterError):
            SymbolMapTable(4, (1, 1, 2, 3))

    def test_random_is_seeded(self):
        assert SymbolMapTable.random(8, 3) == SymbolMapTable.random(8, 3)


class TestCombine:
    def _segs(self, info, cover):
        return Segment(MapKind.CUBIC, info), Segment(MapKind.LOGISTIC, cover)

    def test_c2(self):
        info, cover = self._segs([0.1, 0.2], [0.7, 0.8])
        f = combine_sequence(info, cover, 2, ModemConfig(2, 2, 4))
        np.testing.assert_array_equal(f.samples, [0.7, 0.8, 0.1, 0.2])

    def test_c1(self):
        info, cover = self._segs([0.1, 0.2], [0.7, 0.8])
        f = combine_sequence(info, cover, 1, ModemConfig(2, 2, 4))
        np.testing.assert_array_equal(f.samples, [0.1, 0.2, 0.7, 0.8])

    def test_m4_c3_index_arithmetic(self):
        cfg = ModemConfig(4, 32, 128)
        info = Segment(MapKind.CUBIC, np.arange(32) + 1000.0)
        cover = Segment(MapKind.LOGISTIC, np.arange(96) + 0.0)
        f = combine_sequence(info, cover, 3, cfg)
        np.testing.assert_array_equal(f.samples[64:96], info.samples)
        np.testing.assert_array_equal(np.r_[f.samples[:64], f.samples[96:]], cover.samples)

    def test_wide_window_left_aligned(self):
        cfg = ModemConfig(2, 2, 8)
        info, cover = self._segs([9.0, 9.5], [1, 2, 3, 4, 5, 6])
        f = combine_sequence(info, cover, 2, cfg)
        np.testing.assert_array_equal(f.samples, [1, 2, 3, 4, 9.0, 9.5, 5, 6])

    @pytest.mark.parametrize("n_info,n_cover,c", [(3, 2, 1), (2, 3, 1), (2, 2, 3), (2, 2, 0)])
    def test_rejects(self, n_info, n_cover, c):
        info, cover = self._segs(np.ones(n_info), np.ones(n_cover))
        with pytest.raises(ParameterError):
            combine_sequence(info, cover, c, ModemConfig(2, 2, 4))


class TestBits:
    def test_bits_to_symbols(self):
        np.testing.assert_array_equal(bits_to_symbols([0, 0, 0, 1, 1, 1, 1, 0], 4), [0, 1, 2, 3])

    def test_indivisible_rejected(self):
        with pytest.raises(ParameterError):
            bits_to_symbols([0, 1, 1], 4)

    def test_non_binary_rejected(self):
        with pytest.raises(ParameterError):
            bits_to_symbols([0, 2], 4)

    @settings(max_examples=50)
    @given(st.sampled_from([2, 4, 8, 16, 64]), st.data())
    def test_round_trip(self, M, data):
        width = M.bit_length() - 1
        bits = data.draw(st.lists(st.integers(0, 1), min_size=0, max_size=10).map(lambda b: b * width))
        bits = np.array(bits, dtype=np.int64)
        np.testing.assert_array_equal(symbols_to_bits(bits_to_symbols(bits, M), M), bits)


class TestModulate:
    cfg = ModemConfig(4, 32, 128)

    def test_frame_count_and_length(self):
        frames = modulate([0, 1, 1, 0], self.cfg)
        assert len(frames) == 2 and all(len(f) == 128 for f in frames)

    def test_positions_follow_gray(self):
        frames = modulate([0, 0, 0, 1, 1, 1, 1, 0], self.cfg)
        assert [f.c for f in frames] == [1, 2, 3, 4]

    def test_deterministic(self):
        a = modulate([1, 0] * 20, self.cfg, seed=7)
        b = modulate([1, 0] * 20, self.cfg, seed=7)
        assert all(np.array_equal(x.samples, y.samples) for x, y in zip(a, b))
        c = modulate([1, 0] * 20, self.cfg, seed=8)
        assert not np.array_equal(a[0].samples, c[0].samples)

    def test_indivisible_bits(self):
        with pytest.raises(ParameterError):
            modulate([1, 0, 1], self.cfg)

    def test_table_mismatch(self):
        with pytest.raises(ParameterError):
            modulate([1, 0], self.cfg, SymbolMapTable.identity(8))

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10**6), M=st.sampled_from([2, 4, 8]), k=st.sampled_from([4, 8, 16]))
    def test_genie_window_extraction(self, seed, M, k):
        cfg = ModemConfig(M, k, 2 * M * k)
        rng = np.random.default_rng(seed)
        bits = rng.integers(0, 2, size=6 * cfg.bits_per_symbol)
        for f in modulate(bits, cfg, SymbolMapTable.random(M, seed), seed=seed):
            start = (f.c - 1) * cfg.window
            np.testing.assert_array_equal(f.samples[start:start + k], f.info_segment.samples)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_exactly_one_cubic_window(self, seed):
        # Unstandardized frames: only the info window obeys the cubic recursion.
        cfg = ModemConfig(4, 16, 64, standardize=False)
        bits = np.random.default_rng(seed).integers(0, 2, size=8)
        for f in modulate(bits, cfg, seed=seed):
            w = f.samples.reshape(4, 16)
            cubic = [np.allclose(np.clip(4 * r[:-1] ** 3 - 3 * r[:-1], -1, 1), r[1:], atol=1e-9)
                     for r in w]
            assert cubic == [j == f.c - 1 for j in range(4)]

    def test_cover_is_one_logistic_run(self):
        cfg = ModemConfig(4, 8, 32, standardize=False)
        f = modulate([1, 1], cfg, seed=3)[0]
        cover = f.cover_segment.samples
        np.testing.assert_allclose(cover[1:], iterate(MapKind.LOGISTIC, cover[0], cover.size - 1), atol=0)

    def test_average_power_near_one(self):
        cfg = ModemConfig(4, 32, 512)
        bits = np.random.default_rng(0).integers(0, 2, size=200)
        power = np.mean([np.mean(f.samples**2) for f in modulate(bits, cfg, seed=1)])
        assert abs(power - 1) < 0.05


class TestChaoticModulator:
    def test_transform_shape(self):
        mod = ChaoticModulator(M=4, k=8, seed=1).fit()
        X = mod.transform([0, 1, 1, 0, 1, 1])
        assert X.shape == (3, 32)
        np.testing.assert_array_equal(mod.symbols_, [1, 3, 2])

    def test_clone_and_params(self):
        mod = ChaoticModulator(M=8, k=16)
        assert clone(mod).get_params() == mod.get_params()
        assert mod.set_params(M=2).M == 2
