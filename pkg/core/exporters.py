"""This module handles exporting simulation curves and analysis reports."""

import csv
from pathlib import Path
from typing import Iterable, Sequence, Union


# Define the file formats for exported results.
CURVE_HEADERS = [
    "scheme",
    "ebn0_db",
    "trials",
    "block_errors",
    "bler",
    "ber",
    "avg_iters",
    "level_errors",
    "seed",
]
COMPLEXITY_HEADERS = ["name", "gf_mul", "float_add", "float_mul", "memory"]


def _number(value) -> str:
    """This function renders floats with 10 significant digits and everything else as is."""
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def curve_row(point) -> list:
    """This function lays out one simulation point in the column order of CURVE_HEADERS."""
    return [
        point.scheme,
        _number(float(point.ebn0_db)),
        str(point.trials),
        str(point.block_errors),
        _number(point.bler),
        _number(point.ber),
        _number(point.avg_iterations),
        ";".join(str(n) for n in point.level_errors),
        str(point.seed),
    ]


def write_curve_csv(path: Union[str, Path], points: Iterable) -> None:
    """This function writes a BLER/BER curve, one row per point. An empty curve gives a header-only file."""
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CURVE_HEADERS)
        for each in points:
            writer.writerow(curve_row(each))


def write_table_csv(path: Union[str, Path], headers: Sequence[str], rows: Iterable[Sequence]) -> None:
    """This function writes a table (complexity, limits, floors) as CSV with a header row."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(headers)
        for each in rows:
            writer.writerow([_number(x) for x in each])


def format_table(headers: Sequence[str], rows: Iterable[Sequence]) -> str:
    """This function lays out rows as an aligned text table: text left-aligned, numbers right-aligned."""
    rows = [list(row) for row in rows]
    cells = [[str(h) for h in headers]] + [[_number(x) for x in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    numeric = [
        bool(rows) and all(not isinstance(row[i], str) for row in rows)
        for i in range(len(headers))
    ]
    lines = []
    for index, row in enumerate(cells):
        parts = []
        for i, cell in enumerate(row):
            parts.append(cell.rjust(widths[i]) if numeric[i] and index else cell.ljust(widths[i]))
        lines.append("  ".join(parts).rstrip())
        if index == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
