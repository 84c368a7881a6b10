"""
This module handles arithmetic in GF(2^m), 1 <= m <= 8, using log/antilog tables.

Elements are integers in [0, q). The bits of an element are the coefficients of a
polynomial over GF(2), least significant bit first, so addition is XOR.

Default primitive polynomials (bitmask includes the x^m term):

  m = 1   x + 1                     0x3
  m = 2   x^2 + x + 1               0x7
  m = 3   x^3 + x + 1               0xB
  m = 4   x^4 + x + 1               0x13
  m = 5   x^5 + x^2 + 1             0x25
  m = 6   x^6 + x + 1               0x43
  m = 7   x^7 + x^3 + 1             0x89
  m = 8   x^8 + x^4 + x^3 + x^2 + 1 0x11D
"""

from dataclasses import dataclass, field as dataclass_field
from typing import Optional, Union

import numpy as np

from .utilities import FieldError


DEFAULT_PRIMITIVE_POLYS = {
    1: 0x3,
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11D,
}

ArrayOrInt = Union[int, np.ndarray]


@dataclass(frozen=True, eq=False)
class Field:
    """GF(2^m). Immutable once built by field_new()."""

    m: int
    primitive_poly: int
    log_table: np.ndarray = dataclass_field(repr=False)
    antilog_table: np.ndarray = dataclass_field(repr=False)
    mul_table: np.ndarray = dataclass_field(repr=False)
    inv_table: np.ndarray = dataclass_field(repr=False)

    @property
    def q(self) -> int:
        return 1 << self.m

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Field)
            and self.m == other.m
            and self.primitive_poly == other.primitive_poly
        )

    def __hash__(self) -> int:
        return hash((self.m, self.primitive_poly))

    def __reduce__(self):
        # Tables are rebuilt on unpickling instead of being shipped to workers.
        return (field_new, (self.m, self.primitive_poly))


_cache: dict = {}


def field_new(m: int, poly: Optional[int] = None) -> Field:
    """This function builds GF(2^m) from the given primitive polynomial, or the documented default."""
    if not 1 <= int(m) <= 8:
        raise FieldError(f"Extension degree m = {m} is out of range (1 to 8).")
    m = int(m)
    if poly is None:
        poly = DEFAULT_PRIMITIVE_POLYS[m]
    poly = int(poly)
    if poly.bit_length() - 1 != m:
        raise FieldError(
            f"Polynomial {poly:#x} has degree {poly.bit_length() - 1}, expected {m}."
        )
    if (m, poly) in _cache:
        return _cache[(m, poly)]
    q = 1 << m
    log_table = np.full(q, -1, dtype=np.int64)
    antilog_table = np.zeros(q, dtype=np.int64)
    x = 1
    for i in range(q - 1):
        if log_table[x] != -1:
            raise FieldError(
                f"Polynomial {poly:#x} is not primitive: x generates a group of order {i}, not {q - 1}."
            )
        antilog_table[i] = x
        log_table[x] = i
        x <<= 1
        if x & q:
            x ^= poly
    if x != 1:
        raise FieldError(f"Polynomial {poly:#x} is not primitive over GF(2).")
    # antilog[q - 1] wraps to 1 so that table lookups on log sums need a single modulo.
    antilog_table[q - 1] = 1
    nonzero = np.arange(1, q)
    logs = log_table[nonzero]
    mul_table = np.zeros((q, q), dtype=np.int64)
    mul_table[1:, 1:] = antilog_table[(logs[:, None] + logs[None, :]) % (q - 1)]
    inv_table = np.zeros(q, dtype=np.int64)
    inv_table[1:] = antilog_table[(-logs) % (q - 1)]
    for table in (log_table, antilog_table, mul_table, inv_table):
        table.setflags(write=False)
    field = Field(m, poly, log_table, antilog_table, mul_table, inv_table)
    _cache[(m, poly)] = field
    return field


def _check_elements(f: Field, *values) -> None:
    for value in values:
        arr = np.asarray(value)
        if arr.size and (arr.min() < 0 or arr.max() >= f.q):
            raise FieldError(f"Element out of range for GF({f.q}).")


def gf_add(f: Field, a: ArrayOrInt, b: ArrayOrInt) -> ArrayOrInt:
    """This function adds field elements (coefficient-wise XOR)."""
    _check_elements(f, a, b)
    return np.bitwise_xor(a, b)


def gf_mul(f: Field, a: ArrayOrInt, b: ArrayOrInt) -> ArrayOrInt:
    """This function multiplies field elements through the log/antilog tables. Zero absorbs."""
    _check_elements(f, a, b)
    result = f.mul_table[a, b]
    return int(result) if np.ndim(result) == 0 else result


def gf_inv(f: Field, a: ArrayOrInt) -> ArrayOrInt:
    """This function returns the multiplicative inverse of a nonzero field element."""
    _check_elements(f, a)
    if np.any(np.asarray(a) == 0):
        raise FieldError("Zero has no multiplicative inverse.")
    result = f.inv_table[a]
    return int(result) if np.ndim(result) == 0 else result


def gf_div(f: Field, a: ArrayOrInt, b: ArrayOrInt) -> ArrayOrInt:
    """This function divides a by a nonzero b."""
    return gf_mul(f, a, gf_inv(f, b))


def gf_pow(f: Field, a: int, exponent: int) -> int:
    """This function raises a field element to an integer power (negative powers need a != 0)."""
    _check_elements(f, a)
    if a == 0:
        if exponent < 0:
            raise FieldError("Zero has no multiplicative inverse.")
        return 1 if exponent == 0 else 0
    return int(f.antilog_table[(f.log_table[a] * exponent) % (f.q - 1)])
