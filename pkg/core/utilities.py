"""This module contains utility functions and exceptions shared by the core modules, kept out of __init__.py because of circular imports."""

import numpy as np


class FecError(Exception):
    """Base class for every error raised by the core modules."""


class FieldError(FecError, ValueError):
    """Invalid field parameters, or arithmetic outside the field's domain."""


class DegenerateMessageError(FecError, ArithmeticError):
    """A message has no positive mass left, so it cannot be normalized."""


class CodeError(FecError, ValueError):
    """Infeasible degree profiles, length mismatches and other code misuse."""


class AlistFormatError(CodeError):
    """A malformed alist file. The message carries the offending line number."""


class ModemError(FecError, ValueError):
    """Out-of-range level symbols or unusable constellation partitions."""


class SchemeError(FecError, ValueError):
    """Unknown presets and inconsistent multilevel schemes."""


class SimulationError(FecError, ValueError):
    """Unusable channel or Monte-Carlo parameters (negative noise, zero rate, unbounded stop rules)."""


def format_outcome(outcome: dict) -> dict:
    """
    This function formats the output dictionary from the command functions in the manner that
    cli.py expects: empty values are discarded.
    """
    return {key: val for key, val in outcome.items() if val}


def _signed_key(value: int) -> int:
    """This function maps a signed integer onto the nonnegative integers (zigzag), for seed material."""
    return 2 * value if value >= 0 else -2 * value - 1


def trial_rng(base_seed: int, point_key: int, trial_index: int) -> np.random.Generator:
    """
    This function returns the random generator for one Monte-Carlo trial. The stream is a
    hash of (base seed, point key, trial index) only, so it does not depend on scheduling.
    """
    seq = np.random.SeedSequence(
        [_signed_key(int(base_seed)), _signed_key(int(point_key)), int(trial_index)]
    )
    return np.random.default_rng(seq)
