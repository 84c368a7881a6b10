import pickle

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.galois import (
    DEFAULT_PRIMITIVE_POLYS,
    field_new,
    gf_add,
    gf_div,
    gf_inv,
    gf_mul,
    gf_pow,
)
from core.utilities import FieldError


class TestFieldConstruction:
    @pytest.mark.parametrize("m", range(1, 9))
    def test_default_fields_build(self, m):
        f = field_new(m)
        assert f.q == 1 << m
        assert f.primitive_poly == DEFAULT_PRIMITIVE_POLYS[m]
        nonzero = np.arange(1, f.q)
        # log and antilog are inverse permutations of the nonzero elements
        assert np.array_equal(f.antilog_table[f.log_table[nonzero]], nonzero)
        assert sorted(f.antilog_table[: f.q - 1].tolist()) == nonzero.tolist()

    @pytest.mark.parametrize("m", [0, 9, -1])
    def test_degree_out_of_range(self, m):
        with pytest.raises(FieldError):
            field_new(m)

    def test_non_primitive_polynomial(self):
        # x^4 + x^3 + x^2 + x + 1 is irreducible but x has order 5
        with pytest.raises(FieldError, match="not primitive"):
            field_new(4, 0x1F)

    def test_wrong_degree_polynomial(self):
        with pytest.raises(FieldError):
            field_new(4, 0x25)

    def test_fields_are_cached(self):
        assert field_new(6) is field_new(6)

    def test_pickle_rebuilds_the_same_field(self):
        f = field_new(8)
        assert pickle.loads(pickle.dumps(f)) is f

    def test_tables_are_read_only(self):
        f = field_new(3)
        with pytest.raises(ValueError):
            f.mul_table[1, 1] = 0


class TestArithmetic:
    def test_known_products(self):
        assert gf_mul(field_new(4), 2, 8) == 3  # x * x^3 = x + 1
        assert gf_mul(field_new(8), 0x80, 2) == 0x1D
        assert gf_mul(field_new(2), 3, 3) == 2

    def test_zero_absorbs(self):
        f = field_new(5)
        assert gf_mul(f, 0, 17) == 0
        assert gf_mul(f, 17, 0) == 0

    def test_addition_is_xor(self):
        f = field_new(4)
        assert gf_add(f, 5, 3) == 6
        assert np.array_equal(gf_add(f, np.array([1, 2]), np.array([1, 3])), [0, 1])

    @pytest.mark.parametrize("m", range(1, 9))
    def test_every_nonzero_element_has_an_inverse(self, m):
        f = field_new(m)
        a = np.arange(1, f.q)
        assert np.all(gf_mul(f, a, gf_inv(f, a)) == 1)

    def test_inverse_of_zero(self):
        with pytest.raises(FieldError):
            gf_inv(field_new(4), 0)
        with pytest.raises(FieldError):
            gf_div(field_new(4), 3, 0)

    def test_out_of_range_element(self):
        with pytest.raises(FieldError):
            gf_mul(field_new(3), 8, 1)

    @given(m=st.integers(1, 8), data=st.data())
    def test_field_axioms(self, m, data):
        f = field_new(m)
        element = st.integers(0, f.q - 1)
        a, b, c = data.draw(element), data.draw(element), data.draw(element)
        assert gf_mul(f, a, b) == gf_mul(f, b, a)
        assert gf_mul(f, a, gf_mul(f, b, c)) == gf_mul(f, gf_mul(f, a, b), c)
        assert gf_mul(f, a, b ^ c) == gf_mul(f, a, b) ^ gf_mul(f, a, c)
        if b:
            assert gf_div(f, gf_mul(f, a, b), b) == a

    @pytest.mark.parametrize("m", [3, 4, 8])
    def test_powers(self, m):
        f = field_new(m)
        for a in range(1, f.q):
            assert gf_pow(f, a, f.q - 1) == 1
            assert gf_pow(f, a, -1) == gf_inv(f, a)
        assert gf_pow(f, 2, 3) == gf_mul(f, 2, gf_mul(f, 2, 2))
        assert gf_pow(f, 0, 0) == 1
        assert gf_pow(f, 0, 5) == 0
        with pytest.raises(FieldError):
            gf_pow(f, 0, -1)


def polynomial_product(a, b, poly, m):
    """Shift-and-add multiplication modulo the field polynomial."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return result


class TestFieldAxioms:
    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_small_fields_exhaustively(self, m):
        f = field_new(m)
        e = np.arange(f.q)
        a, b, c = e[:, None, None], e[None, :, None], e[None, None, :]
        ab = gf_mul(f, a, b)
        assert np.array_equal(ab, gf_mul(f, b, a))
        assert np.array_equal(gf_mul(f, ab, c), gf_mul(f, a, gf_mul(f, b, c)))
        assert np.array_equal(gf_mul(f, a, gf_add(f, b, c)), gf_add(f, ab, gf_mul(f, a, c)))
        assert not np.any(gf_add(f, e, e))
        expected = [[polynomial_product(x, y, f.primitive_poly, m) for y in range(f.q)] for x in range(f.q)]
        assert np.array_equal(f.mul_table, expected)

    @pytest.mark.parametrize("m", [6, 8])
    def test_large_fields_on_random_triples(self, m):
        f = field_new(m)
        a, b, c = np.random.default_rng(m).integers(0, f.q, size=(3, 10000))
        ab = gf_mul(f, a, b)
        assert np.array_equal(ab, gf_mul(f, b, a))
        assert np.array_equal(gf_mul(f, ab, c), gf_mul(f, a, gf_mul(f, b, c)))
        assert np.array_equal(gf_mul(f, a, gf_add(f, b, c)), gf_add(f, ab, gf_mul(f, a, c)))
        assert not np.any(gf_add(f, a, a))
        for x, y in zip(a[:500], b[:500]):
            assert gf_mul(f, int(x), int(y)) == polynomial_product(int(x), int(y), f.primitive_poly, m)

    @pytest.mark.parametrize("m", range(1, 9))
    def test_scaling_permutes_the_field(self, m):
        f = field_new(m)
        e = np.arange(f.q)
        for h in range(1, f.q):
            image = gf_mul(f, h, e)
            assert image[0] == 0
            assert sorted(image.tolist()) == e.tolist()
