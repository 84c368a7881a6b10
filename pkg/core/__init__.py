"""This package contains the non-binary LDPC codec, the multilevel QAM modem and the Monte-Carlo and analysis tools around them."""

import configparser
import logging
from pathlib import Path
from typing import Union

from .utilities import format_outcome


__version__ = "1.0.0"
configs = configparser.ConfigParser(comment_prefixes="|", delimiters=("=",), allow_no_value=True)
configs.optionxform = str
logger = logging.getLogger(__name__)

# (section, option, default, explanatory comment or None)
_DEFAULTS = [
    ("DECODER", "iterations", "30", "; Maximum number of FFT-QSPA iterations per block."),
    (
        "DECODER",
        "early_stop",
        "true",
        "; Change the following to “false” to always run the full number of iterations.",
    ),
    (
        "SIMULATION",
        "stop_errors",
        "100",
        "; A simulation point stops after this many block errors…",
    ),
    ("SIMULATION", "max_trials", "1000000", "; …or after this many blocks, whichever comes first."),
    (
        "SIMULATION",
        "chunk",
        "32",
        "; Blocks per work unit. The stop rule is checked between units, so this affects the results; workers do not.",
    ),
    ("SIMULATION", "workers", "1", None),
    (
        "CODES",
        "nonbinary_column_weights",
        "2:1.0",
        "; Column-weight fractions for PEG codes over GF(q > 2), e.g., “2:0.75,3:0.25”.",
    ),
    ("CODES", "binary_column_weights", "2:0.5,3:0.4,6:0.1", None),
    ("CODES", "peg_seed", "1", None),
    (
        "CAPACITY",
        "method",
        "quadrature",
        "; Set method to “quadrature” or “monte-carlo”.",
    ),
    ("CAPACITY", "samples", "1000000", "; Only used by the Monte-Carlo method."),
    ("CAPACITY", "seed", "20160101", None),
]


def _load_configs(path: Union[str, Path] = "configs.ini") -> dict:
    """
    This function loads the configurations from the configs.ini file,
    and if necessary creates that file, missing sections, and/or missing options.
    """
    outcome = {"errors": [], "result": ""}
    path = Path(path)
    try:
        if not path.is_file():
            with open(path, "w") as f:
                pass
        for section in configs.sections():
            configs.remove_section(section)
        configs.read(path)
        for section, option, default, comment in _DEFAULTS:
            if not configs.has_section(section):
                configs.add_section(section)
            if not configs.has_option(section, option):
                if comment:
                    configs.set(section, comment)
                configs.set(section, option, default)
        with open(path, "w") as f:
            configs.write(f)
        outcome["result"] = "Configurations loaded successfully."
    except (OSError, configparser.Error) as err:
        outcome["errors"].append(f"The configuration file {path} could not be loaded: {err}")
        logger.error(outcome["errors"][-1])
    return format_outcome(outcome)


def get_configs(path: Union[str, Path, None] = None) -> dict:
    """
    This function gets the current settings, section by section, loading (and if need be
    creating) the configs.ini file on first use or when a path is given.
    """
    if path is not None or not configs.sections():
        _load_configs(path or "configs.ini")
    currentconfigs = {}
    for eachsection in configs.sections():
        currentconfigs[eachsection] = {
            key: val for key, val in configs.items(eachsection) if not key.startswith(";")
        }
    return currentconfigs
