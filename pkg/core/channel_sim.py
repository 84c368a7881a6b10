"""
This module contains the AWGN channel, Eb/N0 bookkeeping and the Monte-Carlo block error
rate harness.

Every trial draws its randomness from trial_rng(seed, point key, trial index), where the point
key is the Eb/N0 value in thousandths of a dB. Trials run in fixed-size chunks and the stop
rule is evaluated after each chunk in chunk order, so the counts depend on the seed and the
chunk size only, never on the number of workers. A wall-time bound gives up that guarantee.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from . import exporters
from . import modem
from .mlc import MlcScheme, level_symbols, msd_decode, pack_info_bits, random_info, zero_info
from .qspa import DEFAULT_MAX_ITERATIONS
from .utilities import SimulationError, trial_rng


logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 32


def awgn(
    x: np.ndarray, N0: float, rng: Union[np.random.Generator, int, None] = None
) -> np.ndarray:
    """This function adds circularly symmetric complex Gaussian noise of variance N0/2 per real dimension."""
    if N0 < 0:
        raise SimulationError(f"N0 must not be negative (got {N0}).")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    x = np.asarray(x, dtype=complex)
    sigma = np.sqrt(N0 / 2.0)
    noise = rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)
    return x + sigma * noise


def ebn0_to_n0(ebn0_db: float, rate: float, bits_per_symbol: int) -> float:
    """This function converts Eb/N0 in dB to N0 for unit symbol energy."""
    spectral = rate * bits_per_symbol
    if spectral <= 0:
        raise SimulationError(
            f"Rate times bits per symbol must be positive (got {rate} x {bits_per_symbol})."
        )
    return 1.0 / (spectral * 10.0 ** (ebn0_db / 10.0))


def ebn0_grid(start: float, stop: float, step: float) -> list:
    """This function returns start, start + step, ... up to and including stop (empty if start > stop)."""
    if step <= 0:
        raise SimulationError(f"The Eb/N0 step must be positive (got {step}).")
    if start > stop:
        return []
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 9) for i in range(count)]


@dataclass(frozen=True)
class StopRule:
    """
    Error target, trial cap and time bound of one point. With level set, only the block
    errors of that level count toward the target.
    """

    min_block_errors: Optional[int] = 100
    max_trials: Optional[int] = 10**6
    max_seconds: Optional[float] = None
    level: Optional[int] = None

    def __post_init__(self):
        if self.max_trials is None and self.max_seconds is None:
            raise SimulationError("A stop rule needs a trial limit or a time limit.")
        if self.max_trials is not None and self.max_trials < 1:
            raise SimulationError(f"max_trials must be positive (got {self.max_trials}).")
        if self.level is not None and self.level < 0:
            raise SimulationError(f"The counted level must be non-negative (got {self.level}).")

    def counted_errors(self, point: "SimPoint") -> int:
        return point.block_errors if self.level is None else point.level_errors[self.level]

    def reached(self, trials: int, block_errors: int, elapsed: float) -> bool:
        if self.min_block_errors is not None and block_errors >= self.min_block_errors:
            return True
        if self.max_trials is not None and trials >= self.max_trials:
            return True
        return self.max_seconds is not None and elapsed >= self.max_seconds


@dataclass
class SimPoint:
    scheme: str
    ebn0_db: float
    seed: int
    info_bits: int  # per block
    trials: int = 0
    block_errors: int = 0
    bit_errors: int = 0
    iterations: int = 0  # summed over trials and coded levels
    level_errors: list = dataclass_field(default_factory=list)
    wall_time: float = 0.0

    @property
    def bler(self) -> float:
        return self.block_errors / self.trials if self.trials else 0.0

    @property
    def ber(self) -> float:
        total = self.trials * self.info_bits
        return self.bit_errors / total if total else 0.0

    @property
    def avg_iterations(self) -> float:
        return self.iterations / self.trials if self.trials else 0.0

    def add(self, tally: dict) -> None:
        self.trials += tally["trials"]
        self.block_errors += tally["block_errors"]
        self.bit_errors += tally["bit_errors"]
        self.iterations += tally["iterations"]
        if not self.level_errors:
            self.level_errors = [0] * len(tally["level_errors"])
        self.level_errors = [a + b for a, b in zip(self.level_errors, tally["level_errors"])]


def run_trials(
    s: MlcScheme,
    N0: float,
    base_seed: int,
    key: int,
    first: int,
    last: int,
    all_zero: bool = False,
    genie: bool = False,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    early_stop: bool = True,
) -> dict:
    """This function runs trials first..last-1 of one point and returns their error counts."""
    tally = {
        "trials": 0,
        "block_errors": 0,
        "bit_errors": 0,
        "iterations": 0,
        "level_errors": [0] * len(s.levels),
    }
    for t in range(first, last):
        rng = trial_rng(base_seed, key, t)
        # Info is always drawn so that all-zero runs see the same noise as random runs.
        info = random_info(s, rng)
        if all_zero:
            info = zero_info(s)
        symbols = level_symbols(s, info)
        y = awgn(modem.modulate(s.partition, symbols), N0, rng)
        decoded = msd_decode(
            s,
            y,
            N0,
            genie_lower=symbols if genie else None,
            max_iter=max_iter,
            early_stop=early_stop,
        )
        wrong = [not np.array_equal(a, b) for a, b in zip(decoded.info, info)]
        tally["trials"] += 1
        tally["block_errors"] += int(any(wrong))
        tally["level_errors"] = [n + int(w) for n, w in zip(tally["level_errors"], wrong)]
        if any(wrong):
            tally["bit_errors"] += int(
                np.count_nonzero(pack_info_bits(s, decoded.info) != pack_info_bits(s, info))
            )
        tally["iterations"] += decoded.iterations
    return tally


_worker_scheme: Optional[MlcScheme] = None


def _init_worker(s: MlcScheme) -> None:
    global _worker_scheme
    _worker_scheme = s


def _worker_trials(*args, **kwargs) -> dict:
    return run_trials(_worker_scheme, *args, **kwargs)


def point_key(ebn0_db: float) -> int:
    """This function returns the seed key of an Eb/N0 value (thousandths of a dB)."""
    return int(round(ebn0_db * 1000))


def run_point(
    s: MlcScheme,
    ebn0_db: float,
    stop: StopRule,
    base_seed: int,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
    all_zero: bool = False,
    genie: bool = False,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    early_stop: bool = True,
    quiet: bool = True,
    pool: Optional[ProcessPoolExecutor] = None,
) -> SimPoint:
    """
    This function simulates one Eb/N0 value until the stop rule is met and returns the
    aggregated counts.
    """
    if chunk < 1:
        raise SimulationError(f"The chunk size must be positive (got {chunk}).")
    if stop.level is not None and stop.level >= len(s.levels):
        raise SimulationError(f"Scheme “{s.name}” has no level {stop.level}.")
    N0 = ebn0_to_n0(ebn0_db, s.rate, s.bits_per_symbol)
    key = point_key(ebn0_db)
    point = SimPoint(s.name, float(ebn0_db), int(base_seed), s.info_bits)
    point.level_errors = [0] * len(s.levels)
    options = dict(all_zero=all_zero, genie=genie, max_iter=max_iter, early_stop=early_stop)
    limit = stop.max_trials
    started = time.monotonic()
    next_first = 0

    def _chunk_bounds():
        nonlocal next_first
        first = next_first
        last = first + chunk if limit is None else min(first + chunk, limit)
        next_first = last
        return first, last

    own_pool = None
    if pool is None and workers > 1:
        pool = own_pool = ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(s,)
        )
    progress = tqdm(
        total=limit,
        desc=f"{s.name} @ {ebn0_db:g} dB",
        unit="blocks",
        disable=quiet,
        leave=False,
    )
    try:
        done = False
        while not done and (limit is None or next_first < limit):
            if pool is None:
                tallies = [run_trials(s, N0, base_seed, key, *_chunk_bounds(), **options)]
            else:
                bounds = []
                while len(bounds) < workers and (limit is None or next_first < limit):
                    bounds.append(_chunk_bounds())
                futures = [
                    pool.submit(_worker_trials, N0, base_seed, key, first, last, **options)
                    for first, last in bounds
                ]
                tallies = [future.result() for future in futures]
            for tally in tallies:
                point.add(tally)
                progress.update(tally["trials"])
                if stop.reached(point.trials, stop.counted_errors(point), time.monotonic() - started):
                    done = True
                    break
            progress.set_postfix(errors=stop.counted_errors(point))
    finally:
        progress.close()
        if own_pool is not None:
            own_pool.shutdown()
    point.wall_time = time.monotonic() - started
    logger.info(
        f"{s.name} at {ebn0_db:g} dB: {point.block_errors}/{point.trials} block errors, "
        f"BLER {point.bler:.3e}, BER {point.ber:.3e}, {point.wall_time:.1f} s."
    )
    return point


def sweep(
    s: MlcScheme,
    grid: Sequence[float],
    stop: StopRule,
    seed: int,
    out_path: Union[str, Path, None] = None,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
    all_zero: bool = False,
    genie: bool = False,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    early_stop: bool = True,
    quiet: bool = True,
) -> list:
    """This function runs every grid point in order and, if out_path is given, writes the curve CSV."""
    points = []
    pool = None
    if workers > 1 and len(grid):
        pool = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(s,))
    try:
        for ebn0_db in grid:
            points.append(
                run_point(
                    s,
                    ebn0_db,
                    stop,
                    seed,
                    workers=workers,
                    chunk=chunk,
                    all_zero=all_zero,
                    genie=genie,
                    max_iter=max_iter,
                    early_stop=early_stop,
                    quiet=quiet,
                    pool=pool,
                )
            )
    finally:
        if pool is not None:
            pool.shutdown()
    if out_path is not None:
        exporters.write_curve_csv(out_path, points)
    return points
