"""
This module contains closed-form decoding complexity per iteration, constellation-constrained
capacity and Shannon limits, and the error-floor estimate for an uncoded top level.
"""

import logging
import math
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Tuple, Union

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import erfc, logsumexp

from . import modem
from .channel_sim import ebn0_to_n0
from .codes import Code
from .mlc import MlcScheme
from .utilities import SchemeError


logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]

CAPACITY_SEED = 20160101
CAPACITY_SAMPLES = 10**6
QUADRATURE_NODES = 128


@dataclass(frozen=True)
class ComplexityReport:
    """Operations and message memory of one decoding iteration."""

    gf_mul: Number
    float_add: Number
    float_mul: Number
    memory: Number

    def __add__(self, other: "ComplexityReport") -> "ComplexityReport":
        return ComplexityReport(
            *(_exact(Fraction(getattr(self, f.name)) + Fraction(getattr(other, f.name))) for f in fields(self))
        )

    def as_row(self) -> list:
        return [getattr(self, f.name) for f in fields(self)]


def _fraction(value: Number) -> Fraction:
    # str() keeps 0.8 as 4/5 instead of its binary expansion.
    return value if isinstance(value, Fraction) else Fraction(str(value))


def _exact(value: Fraction) -> Number:
    return int(value) if value.denominator == 1 else float(value)


def complexity_estimate(
    n: int,
    rate: Number,
    q: int,
    row_weight: Number,
    col_weight: Number,
    max_row_weight: int,
) -> ComplexityReport:
    """
    This function evaluates the per-iteration costs of FFT-QSPA for a code of length n, rate R over
    GF(q) with average row weight row_weight, average column weight col_weight and maximum row
    weight max_row_weight. Results are exact (ints when the inputs make them integral).
    """
    if q < 2 or q & (q - 1):
        raise ValueError(f"q = {q} is not a power of two.")
    R = _fraction(rate)
    if not 0 < R < 1:
        raise ValueError(f"The rate must lie strictly between 0 and 1 (got {rate}).")
    N = Fraction(n)
    checks = (1 - R) * N
    row = _fraction(row_weight)
    col = _fraction(col_weight)
    log2q = q.bit_length() - 1
    gf_mul = 2 * checks * row
    return ComplexityReport(
        gf_mul=_exact(gf_mul),
        float_add=_exact(gf_mul * q * log2q),
        float_mul=_exact(checks * (2 * row - 1) * (q - 1) + N * (2 * col - 1) * (q - 1)),
        memory=_exact(checks * max_row_weight * (q - 1)),
    )


# Parameters of the four columns of the published complexity table, with its values.
TABLE_ONE = {
    "QAM-64 LDPC GF(64)": (
        dict(n=2000, rate=0.8, q=64, row_weight=10, col_weight=2, max_row_weight=11),
        (8000, 3072000, 856800, 277200),
    ),
    "QAM-64 MLC GF(16)": (
        dict(n=2000, rate=0.7, q=16, row_weight=7.5, col_weight=2.25, max_row_weight=8),
        (9000, 576000, 231000, 72000),
    ),
    "QAM-256 LDPC GF(256)": (
        dict(n=1500, rate=0.8, q=256, row_weight=10, col_weight=2, max_row_weight=11),
        (6000, 12288000, 2601000, 841500),
    ),
    "QAM-256 MLC GF(16)": (
        dict(n=1500, rate=0.6, q=16, row_weight=5.625, col_weight=2.25, max_row_weight=6),
        (6750, 432000, 171000, 54000),
    ),
}


def complexity_for_code(c: Code) -> ComplexityReport:
    """This function reads the parameters off an actual parity-check matrix (design rate 1 - M/N)."""
    return complexity_estimate(
        c.n,
        Fraction(c.n - c.m, c.n),
        c.field.q,
        Fraction(c.n_edges, c.m),
        Fraction(c.n_edges, c.n),
        c.max_row_weight,
    )


def complexity_for_scheme(s: MlcScheme) -> ComplexityReport:
    """This function sums the coded levels; uncoded levels cost nothing."""
    total = ComplexityReport(0, 0, 0, 0)
    for index in s.coded_levels:
        total = total + complexity_for_code(s.levels[index].code)
    return total


def gaussian_capacity(snr_db: float) -> float:
    return float(np.log2(1.0 + 10.0 ** (snr_db / 10.0)))


def _pam_capacity(amplitudes: np.ndarray, sigma: float, nodes: int) -> float:
    """Mutual information of equiprobable PAM in real Gaussian noise of std sigma, by Gauss-Hermite quadrature."""
    t, w = hermgauss(nodes)
    z = math.sqrt(2.0) * sigma * t
    # d[i, j] = a_i - a_j
    d = amplitudes[:, None] - amplitudes[None, :]
    exponent = -((d[:, :, None] + z[None, None, :]) ** 2 - z[None, None, :] ** 2) / (2 * sigma**2)
    penalty = logsumexp(exponent, axis=1) / math.log(2.0)  # shape (L, nodes)
    expected = (penalty @ w).mean() / math.sqrt(math.pi)
    return float(math.log2(len(amplitudes)) - expected)


def capacity_estimate(
    M: int,
    snr_db: float,
    method: str = "quadrature",
    samples: int = CAPACITY_SAMPLES,
    seed: int = CAPACITY_SEED,
) -> Tuple[float, float]:
    """
    This function returns (mutual information in bits per symbol, standard error) for uniform
    square M-QAM at Es/N0 = snr_db (unit symbol energy). "quadrature" treats the I and Q axes as
    two independent PAM channels; "monte-carlo" averages over seeded samples of the full 2D channel.
    """
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite (got {snr_db}).")
    c = modem.constellation_new(M)
    N0 = 10.0 ** (-snr_db / 10.0)
    if method == "quadrature":
        return 2.0 * _pam_capacity(c.amplitudes, math.sqrt(N0 / 2.0), QUADRATURE_NODES), 0.0
    if method != "monte-carlo":
        raise ValueError(f"Unknown capacity method “{method}”.")
    rng = np.random.default_rng(seed)
    penalties = np.empty(samples)
    block = 8192
    for start in range(0, samples, block):
        size = min(block, samples - start)
        x = c.points[rng.integers(0, M, size=size)]
        noise = np.sqrt(N0 / 2.0) * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
        y = x + noise
        exponent = -(np.abs(y[:, None] - c.points[None, :]) ** 2 - np.abs(noise)[:, None] ** 2) / N0
        penalties[start:start + size] = logsumexp(exponent, axis=1) / math.log(2.0)
    capacity = math.log2(M) - float(penalties.mean())
    stderr = float(penalties.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return capacity, stderr


def cm_capacity(
    M: int,
    snr_db: float,
    method: str = "quadrature",
    samples: int = CAPACITY_SAMPLES,
    seed: int = CAPACITY_SEED,
) -> float:
    """Constellation-constrained capacity of uniform M-QAM in bits per channel use."""
    return capacity_estimate(M, snr_db, method, samples, seed)[0]


def shannon_limit(
    M: int,
    rate: float,
    method: str = "quadrature",
    samples: int = CAPACITY_SAMPLES,
    seed: int = CAPACITY_SEED,
    tolerance: float = 1e-3,
) -> float:
    """
    This function returns the smallest Eb/N0 (dB) at which the constellation-constrained capacity of
    M-QAM reaches rate * log2 M bits per symbol, by bisection.
    """
    bits = math.log2(M)
    target = rate * bits
    if not 0 < target < bits:
        raise ValueError(f"The rate must lie strictly between 0 and 1 (got {rate}).")

    def _gap(ebn0_db: float) -> float:
        N0 = ebn0_to_n0(ebn0_db, rate, int(bits))
        return cm_capacity(M, -10.0 * math.log10(N0), method, samples, seed) - target

    low, high = -2.0, 40.0
    middle = (low + high) / 2.0
    for _ in range(100):
        middle = (low + high) / 2.0
        gap = _gap(middle)
        if abs(gap) < tolerance and high - low < 1e-3:
            break
        if gap < 0:
            low = middle
        else:
            high = middle
    logger.info(f"Shannon limit of {M}-QAM at rate {rate}: {middle:.3f} dB ({method}).")
    return middle


def q_function(x):
    """Gaussian tail probability Q(x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def error_floor_uncoded(s: MlcScheme, ebn0_db: float) -> float:
    """
    This function estimates the block error rate left by an uncoded top level when every lower
    level is decoded correctly: per axis the top level sees PAM on a coarse sub-grid, and the
    block fails when any of its N_s symbols is wrong.
    """
    if s.mapping != "symbol" or s.levels[-1].coded:
        raise SchemeError(f"Scheme “{s.name}” has no uncoded top level.")
    p = s.partition
    N0 = ebn0_to_n0(ebn0_db, s.rate, s.bits_per_symbol)
    sigma = math.sqrt(N0 / 2.0)
    lower_i = sum(a_i for a_i, _ in p.axis_bits[:-1])
    lower_q = sum(a_q for _, a_q in p.axis_bits[:-1])
    top_i, top_q = p.axis_bits[-1]
    # log of the probability that one symbol survives, summed over the two axes
    log_correct = 0.0
    for lower, top in ((lower_i, top_i), (lower_q, top_q)):
        points = 1 << top
        spacing = p.constellation.fine_distance * (1 << lower)
        axis_error = 2.0 * (1.0 - 1.0 / points) * float(q_function(spacing / (2.0 * sigma)))
        log_correct += math.log1p(-axis_error)
    return float(-math.expm1(s.n_symbols * log_correct))
