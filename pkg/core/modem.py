"""
This module handles square-QAM constellations, Gray labeling, the multilevel coset partition,
modulation, and the three soft demappers.

Conventions:

  Amplitudes per axis are -(L-1), ..., -1, +1, ..., +(L-1) (L = sqrt(M)), index 0 the most
  negative, scaled so the mean symbol energy is 1.

  A label a (log2 M bits) splits into an I part (the low bI bits) and a Q part (the high bQ
  bits). With Gray labeling each part is the binary-reflected Gray code of the axis index;
  with natural labeling it is the axis index itself. Odd bit counts give I the extra bit.

  Multilevel partitions use natural lattice coordinates. Level widths (m0, m1, ...) are
  spread over the axes bit by bit, each bit going to the axis with fewer bits so far (ties
  to I). Within a level symbol the low aI bits are its I bits, the next aQ bits its Q bits.
  Level 0 bits are the least significant lattice coordinates, so level 0 picks a residue of
  the fine grid and higher levels pick points of ever coarser sub-grids (the cosets).

  The combined label of a point is sum_l s_l << (m0 + ... + m_{l-1}); `points[label]` is the
  point. A single-level partition keeps the Gray labeling of its constellation.
"""

import math
from dataclasses import dataclass, field as dataclass_field
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from .utilities import ModemError


def gray_encode(index: np.ndarray) -> np.ndarray:
    index = np.asarray(index)
    return index ^ (index >> 1)


def gray_decode(code: np.ndarray) -> np.ndarray:
    code = np.array(code, copy=True)
    shift = code >> 1
    while np.any(shift):
        code ^= shift
        shift >>= 1
    return code


def _split_bits(bits: int) -> tuple:
    return (bits + 1) // 2, bits // 2


@dataclass(frozen=True, eq=False)
class Constellation:
    """Square M-QAM with unit mean energy; points[a] is the point labeled a."""

    M: int
    gray: bool
    amplitudes: np.ndarray = dataclass_field(repr=False)
    points: np.ndarray = dataclass_field(repr=False)

    @property
    def bits_per_symbol(self) -> int:
        return self.M.bit_length() - 1

    @property
    def mean_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    @property
    def fine_distance(self) -> float:
        """Distance between neighboring points."""
        return float(self.amplitudes[1] - self.amplitudes[0])


def constellation_new(M: int, gray: bool = True) -> Constellation:
    """This function builds square M-QAM (M = 4, 16, 64, 256) with the chosen per-axis labeling."""
    bits = M.bit_length() - 1
    if M < 4 or (1 << bits) != M or bits % 2 or bits > 8:
        raise ModemError(f"M = {M} is not a square QAM order between 4 and 256.")
    side = 1 << (bits // 2)
    e_avg = 2.0 * (M - 1) / 3.0
    amplitudes = (2.0 * np.arange(side) - (side - 1)) / math.sqrt(e_avg)
    b_i, _ = _split_bits(bits)
    labels = np.arange(M)
    part_i = labels & ((1 << b_i) - 1)
    part_q = labels >> b_i
    if gray:
        part_i, part_q = gray_decode(part_i), gray_decode(part_q)
    points = amplitudes[part_i] + 1j * amplitudes[part_q]
    amplitudes.setflags(write=False)
    points.setflags(write=False)
    return Constellation(M, gray, amplitudes, points)


@dataclass(frozen=True, eq=False)
class LevelPartition:
    """Level widths over a constellation, the per-axis allocation, and the combined-label point table."""

    constellation: Constellation
    widths: tuple
    axis_bits: tuple  # (aI, aQ) per level
    points: np.ndarray = dataclass_field(repr=False)

    @property
    def n_levels(self) -> int:
        return len(self.widths)

    @property
    def offsets(self) -> tuple:
        """Bit offset of each level inside the combined label."""
        return tuple(int(x) for x in np.concatenate(([0], np.cumsum(self.widths)[:-1])))

    def min_intra_coset_distance(self, level: int) -> float:
        """
        This function returns the minimum distance between points that share the symbols of
        all levels below `level` (for level 0, the whole constellation).
        """
        offset = self.offsets[level]
        low = np.arange(len(self.points)) & ((1 << offset) - 1)
        best = math.inf
        for residue in np.unique(low):
            coset = self.points[low == residue]
            if coset.size < 2:
                continue
            gaps = np.abs(coset[:, None] - coset[None, :])
            best = min(best, float(gaps[gaps > 0].min()))
        return best


def _allocate_axes(widths: Sequence[int]) -> tuple:
    used = [0, 0]
    allocation = []
    for width in widths:
        level = [0, 0]
        for _ in range(width):
            axis = 0 if used[0] <= used[1] else 1
            used[axis] += 1
            level[axis] += 1
        allocation.append(tuple(level))
    return tuple(allocation)


def partition_new(c: Constellation, widths: Sequence[int]) -> LevelPartition:
    """This function splits the label bits of `c` into levels and builds the coset point table."""
    widths = tuple(int(w) for w in widths)
    if not widths or min(widths) < 1 or sum(widths) != c.bits_per_symbol:
        raise ModemError(
            f"Level widths {widths} must be positive and sum to {c.bits_per_symbol}."
        )
    allocation = _allocate_axes(widths)
    if len(widths) == 1:
        points = c.points
    else:
        labels = np.arange(c.M)
        index_i = np.zeros(c.M, dtype=np.int64)
        index_q = np.zeros(c.M, dtype=np.int64)
        shift = 0
        consumed_i = consumed_q = 0
        for width, (a_i, a_q) in zip(widths, allocation):
            symbol = (labels >> shift) & ((1 << width) - 1)
            index_i |= (symbol & ((1 << a_i) - 1)) << consumed_i
            index_q |= (symbol >> a_i) << consumed_q
            consumed_i += a_i
            consumed_q += a_q
            shift += width
        points = c.amplitudes[index_i] + 1j * c.amplitudes[index_q]
        points.setflags(write=False)
    partition = LevelPartition(c, widths, allocation, points)
    distances = [partition.min_intra_coset_distance(level) for level in range(len(widths))]
    if any(b <= a for a, b in zip(distances, distances[1:])):
        raise ModemError(
            f"Level widths {widths} do not give strictly growing intra-coset distances."
        )
    return partition


def modulate(p: LevelPartition, level_symbols: Sequence[np.ndarray]) -> np.ndarray:
    """This function maps one symbol per level (arrays of equal length) onto constellation points."""
    if len(level_symbols) != p.n_levels:
        raise ModemError(f"Expected {p.n_levels} levels of symbols, got {len(level_symbols)}.")
    labels = None
    for symbols, width, offset in zip(level_symbols, p.widths, p.offsets):
        symbols = np.asarray(symbols, dtype=np.int64)
        if symbols.size and (symbols.min() < 0 or symbols.max() >= (1 << width)):
            raise ModemError(f"A level symbol is out of range for a {width}-bit level.")
        labels = symbols << offset if labels is None else labels | (symbols << offset)
    return p.points[labels]


def _metrics(y: np.ndarray, points: np.ndarray, N0: float) -> np.ndarray:
    """-|y - s|^2 / N0 for every received value (rows) and candidate point (last axis)."""
    if N0 <= 0:
        raise ModemError(f"N0 must be positive (got {N0}).")
    y = np.asarray(y, dtype=complex)
    return -np.abs(y[..., None] - points) ** 2 / N0


def demap_symbol_full(c, y: np.ndarray, N0: float) -> np.ndarray:
    """
    This function returns, for every received value, the distribution over labels a of
    exp(-|y - s(a)|^2 / N0), normalized. `c` is a Constellation or a LevelPartition.
    """
    return softmax(_metrics(y, c.points, N0), axis=-1)


def demap_level(
    p: LevelPartition,
    y: np.ndarray,
    N0: float,
    level: int,
    decided_lower: Optional[Sequence[np.ndarray]] = None,
) -> np.ndarray:
    """
    This function returns, per received value, the distribution over the level-`level` symbol b:
    the sum over points consistent with the decided lower-level symbols and b of
    exp(-|y - s|^2 / N0), computed with log-sum-exp and normalized.
    """
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    decided_lower = list(decided_lower or [])
    if len(decided_lower) != level:
        raise ModemError(f"Level {level} needs decisions for {level} lower levels.")
    offset = p.offsets[level]
    width = p.widths[level]
    higher = sum(p.widths[level + 1:])
    low = np.zeros(y.shape, dtype=np.int64)
    for symbols, lower_offset in zip(decided_lower, p.offsets):
        low |= np.asarray(symbols, dtype=np.int64) << lower_offset
    b = np.arange(1 << width)
    h = np.arange(1 << higher)
    candidates = (
        low[:, None, None] | (b[None, :, None] << offset) | (h[None, None, :] << (offset + width))
    )
    metrics = _metrics(y[:, None], p.points[candidates], N0)
    return softmax(logsumexp(metrics, axis=-1), axis=-1)


def demap_bits_binary(c: Constellation, y: np.ndarray, N0: float) -> np.ndarray:
    """
    This function returns per-bit distributions of shape (len(y), log2 M, 2); bit k is bit k of
    the label (least significant first). Each bit marginalizes exp(-|y - s|^2 / N0) over its 0-set and 1-set.
    """
    metrics = _metrics(np.atleast_1d(y), c.points, N0)
    labels = np.arange(c.M)
    out = np.empty(metrics.shape[:-1] + (c.bits_per_symbol, 2))
    for k in range(c.bits_per_symbol):
        ones = ((labels >> k) & 1).astype(bool)
        out[..., k, 0] = logsumexp(metrics[..., ~ones], axis=-1)
        out[..., k, 1] = logsumexp(metrics[..., ones], axis=-1)
    return softmax(out, axis=-1)


def hard_decision(c, y: np.ndarray) -> np.ndarray:
    """This function returns the label of the nearest point to each received value."""
    return np.argmin(np.abs(np.asarray(y)[..., None] - c.points), axis=-1)
