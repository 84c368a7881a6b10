import numpy as np
import pytest

from core.channel_sim import awgn, ebn0_to_n0
from core.codes import DegreeProfile, encode, extract_info, is_codeword, peg_construct
from core.galois import field_new
from core.mlc import (
    PRESETS,
    level_symbols,
    mlc_encode,
    msd_decode,
    nominal_rate,
    pack_info_bits,
    preset_new,
    random_info,
    scheme_new,
    unpack_info_bits,
    zero_info,
)
from core.modem import demap_symbol_full
from core.qspa import decode
from core.utilities import SchemeError


class TestPresets:
    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_every_preset_runs_at_rate_four_fifths(self, name):
        assert nominal_rate(name) == pytest.approx(0.8)

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_reduced_presets_produce_codewords(self, name, rng):
        s = preset_new(name, n_symbols=200, seed=4)
        for _ in range(1000):
            symbols = level_symbols(s, random_info(s, rng))
            for index in s.coded_levels:
                code = s.levels[index].code
                word = symbols[index]
                if s.mapping == "bits":
                    width = s.levels[index].width
                    word = ((word[:, None] >> np.arange(width)) & 1).reshape(-1)
                assert is_codeword(code, word)

    def test_reduced_scale_keeps_the_level_rates(self, mlc_scheme):
        code = mlc_scheme.levels[0].code
        assert (code.n, code.m) == (40, 12)
        assert not mlc_scheme.levels[1].coded
        assert mlc_scheme.coded_levels == [0]

    def test_unknown_preset(self):
        with pytest.raises(SchemeError, match="Choose one of"):
            preset_new("qam32-gf32")

    def test_block_too_short_for_a_code(self):
        with pytest.raises(SchemeError):
            preset_new("qam256-gf16-mlc-915", n_symbols=1)

    def test_supplied_codes_replace_peg(self, gf16):
        code = peg_construct(gf16, DegreeProfile.regular(40, 10, 2), seed=9)
        s = preset_new("qam64-gf16-mlc", n_symbols=40, codes=[code])
        assert s.levels[0].code is code
        with pytest.raises(SchemeError):
            preset_new("qam64-gf16-mlc", n_symbols=40, codes=[code, code])


class TestSchemeAssembly:
    def test_code_field_must_match_the_level(self, gf4):
        code = peg_construct(gf4, DegreeProfile.regular(20, 5, 2), seed=1)
        with pytest.raises(SchemeError):
            scheme_new("bad", 64, ((4, code), (2, None)), 20)

    def test_code_length_must_match_the_block(self, small_code):
        with pytest.raises(SchemeError):
            scheme_new("bad", 64, ((4, small_code), (2, None)), 40)

    def test_bit_mapping_needs_one_binary_code(self, small_code):
        with pytest.raises(SchemeError):
            scheme_new("bad", 64, ((4, small_code), (2, None)), 48, mapping="bits")

    def test_unknown_mapping(self):
        with pytest.raises(SchemeError):
            scheme_new("bad", 16, ((4, None),), 10, mapping="labels")

    def test_uncoded_scheme(self):
        s = scheme_new("plain", 16, ((3, None), (1, None)), 5)
        assert s.rate == 1.0
        assert s.info_lengths == (5, 5)
        assert s.info_bits == 20


class TestEncodeDecode:
    def test_noiseless_blocks_decode_exactly(self, mlc_scheme, rng):
        info = random_info(mlc_scheme, rng)
        y = mlc_encode(mlc_scheme, info)
        decoded = msd_decode(mlc_scheme, y, 1e-4)
        assert decoded.converged
        for a, b in zip(decoded.info, info):
            assert np.array_equal(a, b)
        assert decoded.results[1] is None

    def test_noiseless_bit_mapping(self, rng):
        s = preset_new("qam64-binary", n_symbols=50, seed=2)
        info = random_info(s, rng)
        decoded = msd_decode(s, mlc_encode(s, info), 1e-4)
        assert np.array_equal(decoded.info[0], info[0])
        assert np.array_equal(decoded.symbols[0], level_symbols(s, info)[0])

    def test_gf8_levels_decode_in_order(self, rng):
        s = preset_new("qam64-gf8-mlc", n_symbols=60, seed=2)
        info = random_info(s, rng)
        decoded = msd_decode(s, mlc_encode(s, info), 1e-4)
        assert len(decoded.results) == 2
        assert all(result.converged for result in decoded.results)
        assert decoded.iterations >= 2
        for a, b in zip(decoded.info, info):
            assert np.array_equal(a, b)

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_every_preset_decodes_clean_blocks(self, name):
        s = preset_new(name, n_symbols=200, seed=4)
        rng = np.random.default_rng(8)
        for _ in range(100):
            info = random_info(s, rng)
            decoded = msd_decode(s, mlc_encode(s, info), 1e-4)
            assert decoded.converged
            for a, b in zip(decoded.info, info):
                assert np.array_equal(a, b)

    def test_single_level_is_demapping_then_decoding(self):
        s = preset_new("qam64-gf64", n_symbols=100, seed=5)
        code = s.levels[0].code
        rng = np.random.default_rng(12)
        N0 = ebn0_to_n0(9.0, s.rate, s.bits_per_symbol)
        for _ in range(10):
            y = awgn(mlc_encode(s, random_info(s, rng)), N0, rng)
            staged = msd_decode(s, y, N0)
            direct = decode(code, demap_symbol_full(s.partition, y, N0))
            assert np.array_equal(staged.symbols[0], direct.decided)
            assert staged.results[0].iterations_used == direct.iterations_used
            assert np.array_equal(staged.info[0], extract_info(code, direct.decided))

    def test_genie_uses_the_true_lower_symbols(self, mlc_scheme, rng):
        info = random_info(mlc_scheme, rng)
        symbols = level_symbols(mlc_scheme, info)
        y = mlc_encode(mlc_scheme, info)
        decoded = msd_decode(mlc_scheme, y, 1e-4, genie_lower=symbols)
        assert np.array_equal(decoded.symbols[1], symbols[1])

    def test_zero_information_gives_the_zero_word(self, mlc_scheme):
        symbols = level_symbols(mlc_scheme, zero_info(mlc_scheme))
        assert all(not s.any() for s in symbols)

    def test_received_length_must_match(self, mlc_scheme):
        with pytest.raises(SchemeError):
            msd_decode(mlc_scheme, np.zeros(39, dtype=complex), 0.1)

    def test_information_shape_is_checked(self, mlc_scheme):
        info = zero_info(mlc_scheme)
        with pytest.raises(SchemeError):
            mlc_encode(mlc_scheme, info[:1])
        info[1] = np.zeros(3, dtype=np.int64)
        with pytest.raises(SchemeError):
            mlc_encode(mlc_scheme, info)

    def test_info_positions_carry_the_data(self, mlc_scheme, rng):
        info = random_info(mlc_scheme, rng)
        code = mlc_scheme.levels[0].code
        assert np.array_equal(level_symbols(mlc_scheme, info)[0], encode(code, info[0]))


class TestInformationBits:
    def test_bookkeeping(self, mlc_scheme):
        k = mlc_scheme.levels[0].code.k
        assert mlc_scheme.info_lengths == (k, 40)
        assert mlc_scheme.info_bits == 4 * k + 2 * 40

    def test_round_trip(self, mlc_scheme, rng):
        info = random_info(mlc_scheme, rng)
        bits = pack_info_bits(mlc_scheme, info)
        assert bits.shape == (mlc_scheme.info_bits,)
        back = unpack_info_bits(mlc_scheme, bits)
        for a, b in zip(back, info):
            assert np.array_equal(a, b)

    def test_level_major_least_significant_first(self):
        s = scheme_new("plain", 16, ((3, None), (1, None)), 2)
        bits = pack_info_bits(s, [np.array([6, 1]), np.array([1, 0])])
        assert bits.tolist() == [0, 1, 1, 1, 0, 0, 1, 0]

    def test_wrong_bit_count(self, mlc_scheme):
        with pytest.raises(SchemeError):
            unpack_info_bits(mlc_scheme, np.zeros(3))

    def test_binary_symbols_carry_one_bit(self):
        s = preset_new("qam64-binary", n_symbols=50, seed=2)
        assert s.levels[0].symbol_bits == 1
        assert s.info_bits == s.levels[0].code.k
        assert s.levels[0].code.field is field_new(1)
