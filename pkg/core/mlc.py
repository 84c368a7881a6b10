"""
This module binds codes, the level partition and the demappers into multilevel encoding (MLC)
and multistage decoding (MSD) pipelines, and holds the shipped scheme presets.

Information bits are packed level-major: all bits of level 0, then level 1, and so on. Inside a
level, symbols follow their index order and each symbol contributes its bits least significant
first.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import modem
from .codes import Code, DegreeProfile, encode, extract_info, peg_construct
from .galois import field_new
from .messages import hard_decision as most_likely
from .qspa import DEFAULT_MAX_ITERATIONS, decode
from .utilities import SchemeError


logger = logging.getLogger(__name__)

NONBINARY_COLUMN_WEIGHTS = {2: 1.0}
BINARY_COLUMN_WEIGHTS = {2: 0.5, 3: 0.4, 6: 0.1}

# name: (M, mapping, symbols per block, ((level width, information symbols or None), ...))
# None marks an uncoded level. "bits" maps a binary code onto Gray-labeled points.
PRESETS = {
    "qam64-binary": (64, "bits", 2000, ((6, 9600),)),
    "qam64-gf64": (64, "symbol", 2000, ((6, 1600),)),
    "qam64-gf16-mlc": (64, "symbol", 2000, ((4, 1400), (2, None))),
    "qam64-gf8-mlc": (64, "symbol", 2000, ((3, 1300), (3, 1900))),
    "qam256-binary": (256, "bits", 1500, ((8, 9600),)),
    "qam256-gf256": (256, "symbol", 1500, ((8, 1200),)),
    "qam256-gf16-mlc": (256, "symbol", 1500, ((4, 900), (4, None))),
    "qam256-gf16-mlc-915": (256, "symbol", 1500, ((4, 915), (4, 1485))),
    "qam256-gf16-mlc-930": (256, "symbol", 1500, ((4, 930), (4, 1470))),
}


@dataclass(frozen=True, eq=False)
class Level:
    """One level of a scheme: its label width and its code (None when the level is uncoded)."""

    width: int
    code: Optional[Code] = None

    @property
    def coded(self) -> bool:
        return self.code is not None

    @property
    def symbol_bits(self) -> int:
        """Bits carried by one information symbol of this level."""
        return self.code.field.m if self.coded else self.width

    def info_length(self, n_symbols: int) -> int:
        return self.code.k if self.coded else n_symbols

    def rate(self) -> float:
        return self.code.rate if self.coded else 1.0


@dataclass(frozen=True, eq=False)
class MlcScheme:
    name: str
    partition: modem.LevelPartition
    levels: tuple
    n_symbols: int
    mapping: str = "symbol"

    @property
    def constellation(self) -> modem.Constellation:
        return self.partition.constellation

    @property
    def bits_per_symbol(self) -> int:
        return self.constellation.bits_per_symbol

    @property
    def info_lengths(self) -> tuple:
        return tuple(level.info_length(self.n_symbols) for level in self.levels)

    @property
    def info_bits(self) -> int:
        return sum(
            level.symbol_bits * k for level, k in zip(self.levels, self.info_lengths)
        )

    @property
    def rate(self) -> float:
        """Information bits per coded label bit: sum of m_l R_l over log2 M."""
        return self.info_bits / (self.n_symbols * self.bits_per_symbol)

    @property
    def coded_levels(self) -> list:
        return [index for index, level in enumerate(self.levels) if level.coded]


def scheme_new(
    name: str,
    M: int,
    levels: Sequence[tuple],
    n_symbols: int,
    mapping: str = "symbol",
) -> MlcScheme:
    """
    This function assembles a scheme from (width, Code or None) pairs and checks that every
    coded level fits: symbol mapping needs GF(2^width) codes of length n_symbols, bit mapping
    needs a single binary code of length n_symbols * log2 M.
    """
    if mapping not in ("symbol", "bits"):
        raise SchemeError(f"Unknown mapping “{mapping}”; use “symbol” or “bits”.")
    if n_symbols < 1:
        raise SchemeError(f"A block needs at least one channel symbol (got {n_symbols}).")
    constellation = modem.constellation_new(M, gray=True)
    levels = tuple(Level(int(width), code) for width, code in levels)
    partition = modem.partition_new(constellation, [level.width for level in levels])
    if mapping == "bits":
        if len(levels) != 1 or not levels[0].coded:
            raise SchemeError("Bit mapping needs exactly one coded level.")
        code = levels[0].code
        if code.field.q != 2 or code.n != n_symbols * levels[0].width:
            raise SchemeError(
                f"Bit mapping needs a binary code of length {n_symbols * levels[0].width}."
            )
    else:
        for index, level in enumerate(levels):
            if not level.coded:
                continue
            if level.code.field.m != level.width:
                raise SchemeError(
                    f"Level {index} is {level.width} bits wide but its code is over GF({level.code.field.q})."
                )
            if level.code.n != n_symbols:
                raise SchemeError(
                    f"Level {index} code length {level.code.n} does not match {n_symbols} channel symbols."
                )
    return MlcScheme(name, partition, levels, int(n_symbols), mapping)


def _scaled_info(full_symbols: int, n_symbols: int, info: int) -> int:
    return int(round(info * n_symbols / full_symbols))


def preset_new(
    name: str,
    n_symbols: Optional[int] = None,
    seed: int = 1,
    nonbinary_column_weights: Optional[dict] = None,
    binary_column_weights: Optional[dict] = None,
    codes: Optional[Sequence[Code]] = None,
) -> MlcScheme:
    """
    This function builds one of the shipped presets. n_symbols shrinks the block while keeping
    every level rate; PEG codes use `seed` (level l uses seed + l). Codes given in `codes`
    replace the PEG codes of the coded levels, in level order.
    """
    if name not in PRESETS:
        raise SchemeError(
            f"Unknown scheme “{name}”. Choose one of: {', '.join(PRESETS)}."
        )
    M, mapping, full_symbols, layout = PRESETS[name]
    n_symbols = full_symbols if n_symbols is None else int(n_symbols)
    if n_symbols < 1:
        raise SchemeError(f"A block needs at least one channel symbol (got {n_symbols}).")
    coded_count = sum(1 for _, info in layout if info is not None)
    if codes is not None and len(codes) != coded_count:
        raise SchemeError(f"Scheme “{name}” has {coded_count} coded levels, got {len(codes)} matrices.")
    levels = []
    supplied = iter(codes or [])
    for index, (width, info) in enumerate(layout):
        if info is None:
            levels.append((width, None))
            continue
        if codes is not None:
            levels.append((width, next(supplied)))
            continue
        if mapping == "bits":
            field = field_new(1)
            length = n_symbols * width
            k = _scaled_info(full_symbols * width, length, info)
            weights = binary_column_weights or BINARY_COLUMN_WEIGHTS
        else:
            field = field_new(width)
            length = n_symbols
            k = _scaled_info(full_symbols, length, info)
            weights = nonbinary_column_weights or NONBINARY_COLUMN_WEIGHTS
        if not 0 < k < length:
            raise SchemeError(f"Level {index} of “{name}” has no room for a code at {n_symbols} symbols.")
        profile = DegreeProfile.from_fractions(length, length - k, weights)
        levels.append((width, peg_construct(field, profile, seed + index)))
    scheme = scheme_new(name, M, levels, n_symbols, mapping)
    logger.info(f"Scheme {name}: {n_symbols} symbols per block, rate {scheme.rate:.4f}.")
    return scheme


def nominal_rate(name: str) -> float:
    """This function returns the design total rate of a preset at full scale."""
    M, mapping, full_symbols, layout = PRESETS[name]
    bits = 0
    for width, info in layout:
        if info is None:
            bits += width * full_symbols
        elif mapping == "bits":
            bits += info
        else:
            bits += width * info
    return bits / (full_symbols * (M.bit_length() - 1))


def random_info(s: MlcScheme, rng: np.random.Generator) -> list:
    """This function draws uniform information symbols for every level."""
    return [
        rng.integers(0, 1 << level.symbol_bits, size=k, dtype=np.int64)
        for level, k in zip(s.levels, s.info_lengths)
    ]


def zero_info(s: MlcScheme) -> list:
    return [np.zeros(k, dtype=np.int64) for k in s.info_lengths]


def _check_info(s: MlcScheme, info: Sequence[np.ndarray]) -> list:
    if len(info) != len(s.levels):
        raise SchemeError(f"Expected information for {len(s.levels)} levels, got {len(info)}.")
    checked = []
    for index, (symbols, level, k) in enumerate(zip(info, s.levels, s.info_lengths)):
        symbols = np.asarray(symbols, dtype=np.int64)
        if symbols.shape != (k,):
            raise SchemeError(f"Level {index} needs {k} information symbols, got {symbols.size}.")
        checked.append(symbols)
    return checked


def _bits_to_symbols(bits: np.ndarray, width: int) -> np.ndarray:
    return (bits.reshape(-1, width) << np.arange(width)).sum(axis=1)


def level_symbols(s: MlcScheme, info: Sequence[np.ndarray]) -> list:
    """This function encodes every coded level and returns the per-level channel symbols."""
    symbols = []
    for level, data in zip(s.levels, _check_info(s, info)):
        if not level.coded:
            symbols.append(data)
            continue
        word = encode(level.code, data)
        if s.mapping == "bits":
            word = _bits_to_symbols(word, level.width)
        symbols.append(word)
    return symbols


def mlc_encode(s: MlcScheme, info: Sequence[np.ndarray]) -> np.ndarray:
    """This function encodes each level and modulates position t of every level jointly onto point t."""
    return modem.modulate(s.partition, level_symbols(s, info))


@dataclass
class MsdResult:
    symbols: list  # decided channel symbols per level
    info: list  # decided information symbols per level
    results: list  # DecodeResult per level, None for uncoded levels

    @property
    def converged(self) -> bool:
        return all(result.converged for result in self.results if result is not None)

    @property
    def iterations(self) -> int:
        return sum(result.iterations_used for result in self.results if result is not None)


def msd_decode(
    s: MlcScheme,
    y: np.ndarray,
    N0: float,
    genie_lower: Optional[Sequence[np.ndarray]] = None,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    early_stop: bool = True,
) -> MsdResult:
    """
    This function decodes the levels in order, demapping each one conditioned on the hard
    decisions of the levels below it. With genie_lower (the true channel symbols of every
    level), those conditions are the true symbols instead.
    """
    y = np.asarray(y, dtype=complex)
    if y.shape != (s.n_symbols,):
        raise SchemeError(f"Expected {s.n_symbols} received values, got {y.size}.")
    symbols, info, results = [], [], []
    for index, level in enumerate(s.levels):
        lower = list(genie_lower[:index]) if genie_lower is not None else symbols
        if s.mapping == "bits":
            priors = modem.demap_bits_binary(s.constellation, y, N0).reshape(-1, 2)
        else:
            priors = modem.demap_level(s.partition, y, N0, index, lower)
        if not level.coded:
            decided = most_likely(priors)
            symbols.append(decided)
            info.append(decided)
            results.append(None)
            continue
        result = decode(level.code, priors, max_iter=max_iter, early_stop=early_stop)
        if not result.converged:
            logger.debug(f"Level {index} did not converge ({result.failure or 'iteration cap'}).")
        word = result.decided
        info.append(extract_info(level.code, word))
        symbols.append(_bits_to_symbols(word, level.width) if s.mapping == "bits" else word)
        results.append(result)
    return MsdResult(symbols, info, results)


def pack_info_bits(s: MlcScheme, info: Sequence[np.ndarray]) -> np.ndarray:
    """This function flattens per-level information symbols into one bit array, level-major."""
    chunks = []
    for level, symbols in zip(s.levels, _check_info(s, info)):
        shifts = np.arange(level.symbol_bits)
        chunks.append(((symbols[:, None] >> shifts) & 1).reshape(-1))
    return np.concatenate(chunks).astype(np.uint8) if chunks else np.zeros(0, dtype=np.uint8)


def unpack_info_bits(s: MlcScheme, bits: np.ndarray) -> list:
    """This function splits a level-major bit array back into per-level information symbols."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape != (s.info_bits,):
        raise SchemeError(f"Expected {s.info_bits} information bits, got {bits.size}.")
    info = []
    start = 0
    for level, k in zip(s.levels, s.info_lengths):
        stop = start + k * level.symbol_bits
        info.append(_bits_to_symbols(bits[start:stop], level.symbol_bits) if k else np.zeros(0, dtype=np.int64))
        start = stop
    return info
