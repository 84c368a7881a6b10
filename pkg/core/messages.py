"""
This module contains the algebra of decoder messages: probability distributions over GF(q).

A distribution (Dist) is a float array whose last axis has length q; p[..., x] is the
probability that the symbol equals field element x. Leading axes are batches, so one call
handles every edge of a Tanner graph at once. A spectrum is the Walsh-Hadamard image of a
distribution, with the same shape.

All public functions behave as pure functions; transforms work on copies.
"""

from dataclasses import dataclass, asdict
from typing import Optional, Sequence

import numpy as np

from .galois import Field
from .utilities import DegenerateMessageError, FieldError


@dataclass
class OpCounter:
    """
    Operation counts gathered while decoding.

    float_add counts only the butterflies of forward and inverse transforms, q*log2(q) per
    transform. float_mul counts the elementwise products of spectra and of distributions.
    Normalizations are not counted. gf_mul counts one field multiplication per message
    relabeling (one per edge entering and one per edge leaving a check node).
    """

    gf_mul: int = 0
    float_add: int = 0
    float_mul: int = 0
    peak_message_memory: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def _log2q(q: int) -> int:
    m = q.bit_length() - 1
    if q < 2 or (1 << m) != q:
        raise FieldError(f"Message length {q} is not a power of two.")
    return m


def normalize(p: np.ndarray) -> np.ndarray:
    """
    This function clamps negative rounding residue to zero and rescales each distribution to sum to one.
    An all-zero distribution raises DegenerateMessageError.
    """
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    totals = p.sum(axis=-1, keepdims=True)
    if not np.all(np.isfinite(totals)) or np.any(totals <= 0.0):
        raise DegenerateMessageError("A message has no positive probability mass.")
    return p / totals


def uniform(f: Field, shape: tuple = ()) -> np.ndarray:
    """This function returns uniform distributions over the field."""
    return np.full(tuple(shape) + (f.q,), 1.0 / f.q)


def point_mass(f: Field, value: int, shape: tuple = ()) -> np.ndarray:
    """This function returns distributions concentrated on one field element."""
    p = np.zeros(tuple(shape) + (f.q,))
    p[..., value] = 1.0
    return p


def scale_permute(f: Field, h, p: np.ndarray) -> np.ndarray:
    """
    This function returns the distribution of h*X for X ~ p, i.e. out[h*x] = p[x].
    h may be a scalar or an array broadcasting against the leading axes of p.
    """
    h = np.asarray(h)
    if np.any(h == 0):
        raise FieldError("Scaling a message by zero is not a permutation.")
    p = np.asarray(p, dtype=float)
    # out[y] = p[h^-1 * y]
    gather = f.mul_table[f.inv_table[h]]
    gather = np.broadcast_to(gather, p.shape)
    return np.take_along_axis(p, gather, axis=-1)


def wht(x: np.ndarray, counter: Optional[OpCounter] = None) -> np.ndarray:
    """
    This function applies the size-2 butterfly (u, v) -> (u + v, u - v) along each of the
    m binary index dimensions. Applying it twice multiplies by q.
    """
    x = np.array(x, dtype=float, copy=True)
    q = x.shape[-1]
    m = _log2q(q)
    lead = x.shape[:-1]
    h = 1
    while h < q:
        y = x.reshape(lead + (q // (2 * h), 2, h))
        u = y[..., 0, :]
        v = y[..., 1, :]
        x = np.stack((u + v, u - v), axis=-2).reshape(lead + (q,))
        h *= 2
    if counter is not None:
        counter.float_add += int(np.prod(lead, dtype=np.int64)) * q * m
    return x


def iwht(s: np.ndarray, counter: Optional[OpCounter] = None) -> np.ndarray:
    """This function inverts wht() (forward transform, then division by q)."""
    s = np.asarray(s, dtype=float)
    return wht(s, counter) / s.shape[-1]


def convolve(
    p1: np.ndarray, p2: np.ndarray, counter: Optional[OpCounter] = None
) -> np.ndarray:
    """
    This function convolves two distributions over the additive group of GF(2^m):
    out[x] = sum_y p1[y] * p2[x XOR y], computed as iwht(wht(p1) * wht(p2)).
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.shape[-1] != p2.shape[-1]:
        raise FieldError("Cannot convolve messages over different fields.")
    product = wht(p1, counter) * wht(p2, counter)
    if counter is not None:
        counter.float_mul += product.size
    return normalize(iwht(product, counter))


def direct_convolve(p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    """This function is the O(q^2) reference convolution (no transform, no normalization)."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    q = p1.shape[-1]
    index = np.arange(q)
    # partner[x, y] = x XOR y
    partner = index[:, None] ^ index[None, :]
    return np.einsum("...y,...xy->...x", p1, p2[..., partner])


def pointwise_product(
    ps: Sequence[np.ndarray], counter: Optional[OpCounter] = None
) -> np.ndarray:
    """This function multiplies distributions entrywise and normalizes the result."""
    if len(ps) == 0:
        raise ValueError("pointwise_product() needs at least one distribution.")
    stacked = np.stack([np.asarray(p, dtype=float) for p in ps])
    if counter is not None:
        counter.float_mul += (len(ps) - 1) * stacked[0].size
    return normalize(np.prod(stacked, axis=0))


def hard_decision(p: np.ndarray) -> np.ndarray:
    """This function returns the most likely symbol of each distribution; ties go to the smallest field value."""
    return np.argmax(p, axis=-1)
