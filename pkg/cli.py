"""This module contains the command line for the NB-LDPC-MLC toolkit."""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import core
from core import analysis, channel_sim, codes, exporters, mlc
from core.galois import field_new
from core.utilities import FecError, format_outcome


logger = logging.getLogger("cli")


@dataclass
class RunConfig:
    """Everything a command needs. Later sources override earlier ones: configs.ini, --config JSON, flags."""

    scheme: Optional[str] = None
    ebn0: list = field(default_factory=list)
    seed: Optional[int] = None
    stop_errors: int = 100
    max_trials: int = 10**6
    max_seconds: Optional[float] = None
    iters: int = 30
    early_stop: bool = True
    out: Optional[str] = None
    workers: int = 1
    chunk: int = channel_sim.DEFAULT_CHUNK
    matrix: list = field(default_factory=list)
    n_symbols: Optional[int] = None
    all_zero: bool = False
    genie: bool = False
    quiet: bool = False
    nonbinary_column_weights: dict = field(default_factory=lambda: dict(mlc.NONBINARY_COLUMN_WEIGHTS))
    binary_column_weights: dict = field(default_factory=lambda: dict(mlc.BINARY_COLUMN_WEIGHTS))
    peg_seed: int = 1
    # construct without a preset
    column_weights: Optional[dict] = None
    length: Optional[int] = None
    checks: Optional[int] = None
    q: Optional[int] = None
    # capacity and complexity
    modulation: int = 64
    rate: float = 0.8
    capacity_method: str = "quadrature"
    capacity_samples: int = analysis.CAPACITY_SAMPLES
    capacity_seed: int = analysis.CAPACITY_SEED
    table: bool = False
    row_weight: Optional[float] = None
    col_weight: Optional[float] = None
    max_row_weight: Optional[int] = None


def _parse_grid(value) -> list:
    """This function reads an Eb/N0 grid: "start:stop:step", a single number, a list, or a {start, stop, step} object."""
    if value is None or value == "":
        return []
    if isinstance(value, dict):
        return channel_sim.ebn0_grid(float(value["start"]), float(value["stop"]), float(value["step"]))
    if isinstance(value, (list, tuple)):
        return [float(x) for x in value]
    if isinstance(value, (int, float)):
        return [float(value)]
    parts = str(value).split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            return channel_sim.ebn0_grid(*(float(x) for x in parts))
    except ValueError:
        pass
    raise FecError(f"Eb/N0 grid “{value}” is not of the form start:stop:step.")


def _from_configs(configs: dict) -> dict:
    """This function maps the configs.ini sections onto RunConfig fields."""
    values = {}
    decoder = configs.get("DECODER", {})
    simulation = configs.get("SIMULATION", {})
    codes_section = configs.get("CODES", {})
    capacity = configs.get("CAPACITY", {})
    try:
        if "iterations" in decoder:
            values["iters"] = int(decoder["iterations"])
        if "early_stop" in decoder:
            values["early_stop"] = decoder["early_stop"].strip().lower() == "true"
        for key in ("stop_errors", "max_trials", "chunk", "workers"):
            if key in simulation:
                values[key] = int(simulation[key])
        for key in ("nonbinary_column_weights", "binary_column_weights"):
            if key in codes_section:
                values[key] = codes.parse_weight_fractions(codes_section[key])
        if "peg_seed" in codes_section:
            values["peg_seed"] = int(codes_section["peg_seed"])
        if "method" in capacity:
            values["capacity_method"] = capacity["method"].strip()
        if "samples" in capacity:
            values["capacity_samples"] = int(capacity["samples"])
        if "seed" in capacity:
            values["capacity_seed"] = int(capacity["seed"])
    except ValueError as err:
        raise FecError(f"configs.ini has an unreadable value: {err}")
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    """This function merges configs.ini, the optional JSON file and the command-line flags into a RunConfig."""
    values = _from_configs(core.get_configs(args.configs))
    known = {f.name for f in fields(RunConfig)}
    if args.config:
        try:
            with open(args.config, "r") as f:
                loaded = json.load(f)
        except json.JSONDecodeError as err:
            raise FecError(f"{args.config} is not valid JSON: {err}")
        if not isinstance(loaded, dict):
            raise FecError(f"{args.config} must hold a JSON object.")
        unknown = sorted(set(loaded) - known)
        if unknown:
            raise FecError(f"{args.config} has unknown keys: {', '.join(unknown)}.")
        values.update(loaded)
    for key, val in vars(args).items():
        if key in known and val is not None and val is not False and val != []:
            values[key] = val
    values["ebn0"] = _parse_grid(values.get("ebn0"))
    if isinstance(values.get("matrix"), str):
        values["matrix"] = [values["matrix"]]
    config = RunConfig(**values)
    _check_ranges(config)
    return config


def _check_ranges(config: RunConfig) -> None:
    """This function rejects settings no command can run with, before any work starts."""
    at_least_one = {
        "iters": config.iters,
        "max_trials": config.max_trials,
        "workers": config.workers,
        "chunk": config.chunk,
        "capacity_samples": config.capacity_samples,
        "n_symbols": config.n_symbols,
    }
    for name, value in at_least_one.items():
        if value is not None and int(value) < 1:
            raise FecError(f"{name} must be at least 1 (got {value}).")
    if config.stop_errors is not None and int(config.stop_errors) < 1:
        raise FecError(f"stop_errors must be at least 1 (got {config.stop_errors}).")
    if config.max_seconds is not None and float(config.max_seconds) <= 0:
        raise FecError(f"max_seconds must be positive (got {config.max_seconds}).")


def _require_seed(config: RunConfig) -> int:
    if config.seed is None:
        raise FecError("A seed is required (--seed or “seed” in the JSON config).")
    return int(config.seed)


def _capacity_seed(config: RunConfig) -> int:
    return int(config.seed) if config.seed is not None else config.capacity_seed


def _scheme(config: RunConfig, seed: int) -> mlc.MlcScheme:
    if not config.scheme:
        raise FecError(f"A scheme is required. Choose one of: {', '.join(mlc.PRESETS)}.")
    loaded = [codes.load_alist(path) for path in config.matrix] or None
    return mlc.preset_new(
        config.scheme,
        n_symbols=config.n_symbols,
        seed=seed,
        nonbinary_column_weights=config.nonbinary_column_weights,
        binary_column_weights=config.binary_column_weights,
        codes=loaded,
    )


#####################
# CODE CONSTRUCTION #
#####################


def cmd_construct(config: RunConfig) -> dict:
    """This function builds PEG codes (for a preset, or from --length/--checks/--q) and saves them as alist files."""
    outcome = {"errors": [], "result": ""}
    try:
        seed = _require_seed(config)
        if not config.out:
            raise FecError("An output path is required (--out).")
        out = Path(config.out)
        if config.scheme:
            scheme = _scheme(config, seed)
            built = [scheme.levels[index].code for index in scheme.coded_levels]
        else:
            if not (config.length and config.checks and config.q):
                raise FecError("Give --scheme, or all of --length, --checks and --q.")
            f_q = field_new(config.q.bit_length() - 1)
            if f_q.q != config.q:
                raise FecError(f"q = {config.q} is not a power of two.")
            weights = config.column_weights or (
                config.binary_column_weights if config.q == 2 else config.nonbinary_column_weights
            )
            profile = codes.DegreeProfile.from_fractions(config.length, config.checks, weights)
            built = [codes.peg_construct(f_q, profile, seed)]
        written = []
        for index, code in enumerate(built):
            path = out if len(built) == 1 else out.with_name(f"{out.stem}.level{index}{out.suffix}")
            codes.save_alist(code, path)
            written.append(
                f"{path}: N = {code.n}, M = {code.m}, K = {code.k}, GF({code.field.q}), girth {codes.girth(code)}"
            )
        outcome["result"] = "\n".join(written)
    except (FecError, ValueError, OSError) as err:
        outcome["errors"].append(str(err))
    return format_outcome(outcome)


##############
# SIMULATION #
##############


def cmd_simulate(config: RunConfig) -> dict:
    """This function runs a BLER/BER sweep and writes the curve CSV (a header-only file for an empty grid)."""
    outcome = {"errors": [], "result": ""}
    try:
        seed = _require_seed(config)
        if not config.out:
            raise FecError("An output path is required (--out).")
        scheme = _scheme(config, config.peg_seed)
        stop = channel_sim.StopRule(config.stop_errors, config.max_trials, config.max_seconds)
        points = channel_sim.sweep(
            scheme,
            config.ebn0,
            stop,
            seed,
            out_path=config.out,
            workers=config.workers,
            chunk=config.chunk,
            all_zero=config.all_zero,
            genie=config.genie,
            max_iter=config.iters,
            early_stop=config.early_stop,
            quiet=config.quiet,
        )
        outcome["result"] = f"{len(points)} points of {scheme.name} written to {config.out}."
    except (FecError, ValueError, OSError) as err:
        outcome["errors"].append(str(err))
    return format_outcome(outcome)


############
# ANALYSIS #
############


def cmd_capacity(config: RunConfig) -> dict:
    """This function prints the constellation-constrained Shannon limit for one modulation and rate."""
    outcome = {"errors": [], "result": ""}
    try:
        limit = analysis.shannon_limit(
            config.modulation,
            config.rate,
            method=config.capacity_method,
            samples=config.capacity_samples,
            seed=_capacity_seed(config),
        )
        outcome["result"] = f"Shannon limit of {config.modulation}-QAM at R = {config.rate:g}: {limit:.2f} dB"
    except (FecError, ValueError, OSError) as err:
        outcome["errors"].append(str(err))
    return format_outcome(outcome)


def cmd_limits(config: RunConfig) -> dict:
    """This function tabulates the Shannon limits of every shipped preset."""
    outcome = {"errors": [], "result": ""}
    try:
        rows = []
        cache = {}
        for name, (M, _, _, _) in mlc.PRESETS.items():
            rate = mlc.nominal_rate(name)
            if (M, rate) not in cache:
                cache[(M, rate)] = analysis.shannon_limit(
                    M,
                    rate,
                    method=config.capacity_method,
                    samples=config.capacity_samples,
                    seed=_capacity_seed(config),
                )
            rows.append([name, M, rate, round(cache[(M, rate)], 2)])
        headers = ["scheme", "M", "rate", "limit_db"]
        if config.out:
            exporters.write_table_csv(config.out, headers, rows)
        outcome["result"] = exporters.format_table(headers, rows)
    except (FecError, ValueError, OSError) as err:
        outcome["errors"].append(str(err))
    return format_outcome(outcome)


def cmd_complexity(config: RunConfig) -> dict:
    """This function prints per-iteration complexity for the published table, a preset, or explicit parameters."""
    outcome = {"errors": [], "result": ""}
    try:
        rows = []
        if config.table:
            for name, (params, _) in analysis.TABLE_ONE.items():
                rows.append([name] + analysis.complexity_estimate(**params).as_row())
        elif config.scheme:
            seed = config.seed if config.seed is not None else config.peg_seed
            scheme = _scheme(config, seed)
            for index in scheme.coded_levels:
                code = scheme.levels[index].code
                rows.append([f"{scheme.name} level {index}"] + analysis.complexity_for_code(code).as_row())
            rows.append([f"{scheme.name} total"] + analysis.complexity_for_scheme(scheme).as_row())
        else:
            needed = (config.length, config.q, config.row_weight, config.col_weight, config.max_row_weight)
            if any(x is None for x in needed):
                raise FecError(
                    "Give --table, --scheme, or all of --length, --rate, --q, --row-weight, --col-weight and --max-row-weight."
                )
            report = analysis.complexity_estimate(
                config.length,
                config.rate,
                config.q,
                config.row_weight,
                config.col_weight,
                config.max_row_weight,
            )
            rows.append([f"N={config.length} R={config.rate:g} GF({config.q})"] + report.as_row())
        if config.out:
            exporters.write_table_csv(config.out, exporters.COMPLEXITY_HEADERS, rows)
        outcome["result"] = exporters.format_table(exporters.COMPLEXITY_HEADERS, rows)
    except (FecError, ValueError, OSError) as err:
        outcome["errors"].append(str(err))
    return format_outcome(outcome)


def cmd_floor(config: RunConfig) -> dict:
    """This function tabulates the uncoded-level error floor of a preset over the Eb/N0 grid."""
    outcome = {"errors": [], "result": ""}
    try:
        seed = config.seed if config.seed is not None else config.peg_seed
        scheme = _scheme(config, seed)
        rows = [
            [scheme.name, ebn0, analysis.error_floor_uncoded(scheme, ebn0)] for ebn0 in config.ebn0
        ]
        headers = ["scheme", "ebn0_db", "bler_floor"]
        if config.out:
            exporters.write_table_csv(config.out, headers, rows)
        outcome["result"] = exporters.format_table(headers, rows)
    except (FecError, ValueError, OSError) as err:
        outcome["errors"].append(str(err))
    return format_outcome(outcome)


####################
# ARGUMENT PARSING #
####################


COMMANDS = {
    "construct": cmd_construct,
    "simulate": cmd_simulate,
    "capacity": cmd_capacity,
    "limits": cmd_limits,
    "complexity": cmd_complexity,
    "floor": cmd_floor,
}


def _weights(text: str) -> dict:
    return codes.parse_weight_fractions(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nbldpc-mlc",
        description="Non-binary LDPC codes and multilevel coding over QAM: construction, simulation and analysis.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {core.__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with run settings")
    common.add_argument("--configs", default="configs.ini", help="INI file with defaults (created if missing)")
    common.add_argument("--scheme", help=f"preset: {', '.join(mlc.PRESETS)}")
    common.add_argument("--ebn0", help="Eb/N0 grid in dB, start:stop:step")
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--matrix", action="append", help="alist file per coded level, in level order")
    common.add_argument("--n-symbols", type=int, help="channel symbols per block (reduced-scale presets)")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("--quiet", action="store_true", help="no progress bars")
    subparsers = parser.add_subparsers(dest="command", required=True)

    construct = subparsers.add_parser("construct", parents=[common], help="build PEG codes and save alist files")
    construct.add_argument("--length", type=int)
    construct.add_argument("--checks", type=int)
    construct.add_argument("--q", type=int)
    construct.add_argument("--column-weights", dest="column_weights", type=_weights)

    simulate = subparsers.add_parser("simulate", parents=[common], help="BLER/BER versus Eb/N0")
    simulate.add_argument("--stop-errors", type=int)
    simulate.add_argument("--max-trials", type=int)
    simulate.add_argument("--max-seconds", type=float)
    simulate.add_argument("--iters", type=int)
    simulate.add_argument("--workers", type=int)
    simulate.add_argument("--chunk", type=int)
    simulate.add_argument("--all-zero", action="store_true")
    simulate.add_argument("--genie", action="store_true", help="feed true lower-level symbols to later levels")

    for name, text in (("capacity", "Shannon limit of one constellation and rate"), ("limits", "Shannon limits of all presets")):
        sub = subparsers.add_parser(name, parents=[common], help=text)
        sub.add_argument("--modulation", type=int)
        sub.add_argument("--rate", type=float)
        sub.add_argument("--method", dest="capacity_method", choices=["quadrature", "monte-carlo"])
        sub.add_argument("--samples", dest="capacity_samples", type=int)

    complexity = subparsers.add_parser("complexity", parents=[common], help="operations per decoding iteration")
    complexity.add_argument("--table", action="store_true", help="the four published configurations")
    complexity.add_argument("--length", type=int)
    complexity.add_argument("--rate", type=float)
    complexity.add_argument("--q", type=int)
    complexity.add_argument("--row-weight", type=float)
    complexity.add_argument("--col-weight", type=float)
    complexity.add_argument("--max-row-weight", type=int)

    subparsers.add_parser("floor", parents=[common], help="error floor of an uncoded top level")
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = build_config(args)
    except (FecError, ValueError, OSError, TypeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    logger.debug(f"Running {args.command} with {config}")
    outcome = COMMANDS[args.command](config)
    if "errors" in outcome:
        print(f"error: {'; '.join(outcome['errors'])}", file=sys.stderr)
        return 1
    print(outcome["result"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
