"""
This module handles LDPC codes over GF(q): construction by progressive edge growth (PEG),
systematic encoding, syndromes, girth, and the extended alist file format.

Extended alist layout (whitespace separated, indices 1-based):

  line 1             N M q
  line 2             max column weight, max row weight
  line 3             the N column weights
  line 4             the M row weights
  next N lines       for column j: "i1 h1 i2 h2 ..." (check index, label) pairs
  next M lines       for row i:    "j1 h1 j2 h2 ..." (variable index, label) pairs

Trailing "0 0" pairs are accepted as padding. A header with only "N M" is read as a classic
binary alist (indices only, zero padded), with every label equal to 1.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .galois import Field, field_new
from .utilities import AlistFormatError, CodeError


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Code:
    """
    Parity-check matrix H over GF(q), stored as a labeled edge list sorted by (check, variable),
    plus the systematic form used by encode(). Build it with build_code() or peg_construct().
    """

    field: Field
    n: int
    m: int
    edge_checks: np.ndarray
    edge_vars: np.ndarray
    edge_labels: np.ndarray
    rank: int
    info_positions: np.ndarray = dataclass_field(repr=False)
    parity_positions: np.ndarray = dataclass_field(repr=False)
    parity_generator: np.ndarray = dataclass_field(repr=False)

    @property
    def k(self) -> int:
        return self.n - self.rank

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def n_edges(self) -> int:
        return int(self.edge_labels.size)

    @property
    def check_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_checks, minlength=self.m)

    @property
    def var_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_vars, minlength=self.n)

    @property
    def avg_row_weight(self) -> float:
        return self.n_edges / self.m

    @property
    def avg_col_weight(self) -> float:
        return self.n_edges / self.n

    @property
    def max_row_weight(self) -> int:
        return int(self.check_degrees.max(initial=0))

    def rows(self) -> list:
        """Phi(i): (variable indices, labels) of every check, in check order."""
        bounds = np.concatenate(([0], np.cumsum(self.check_degrees)))
        return [
            (self.edge_vars[a:b], self.edge_labels[a:b])
            for a, b in zip(bounds[:-1], bounds[1:])
        ]

    def cols(self) -> list:
        """Gamma(j): (check indices, labels) of every variable, in variable order."""
        order = np.lexsort((self.edge_checks, self.edge_vars))
        bounds = np.concatenate(([0], np.cumsum(self.var_degrees)))
        checks = self.edge_checks[order]
        labels = self.edge_labels[order]
        return [(checks[a:b], labels[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]

    def dense_matrix(self) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=np.int64)
        H[self.edge_checks, self.edge_vars] = self.edge_labels
        return H


@dataclass(frozen=True)
class DegreeProfile:
    """Column-weight sequence (non-decreasing) for N variable nodes, and the number of checks M."""

    column_weights: tuple
    n_checks: int

    @property
    def n_vars(self) -> int:
        return len(self.column_weights)

    @property
    def n_edges(self) -> int:
        return int(sum(self.column_weights))

    @classmethod
    def regular(cls, n: int, m: int, weight: int) -> "DegreeProfile":
        return cls(tuple([int(weight)] * int(n)), int(m))

    @classmethod
    def from_fractions(cls, n: int, m: int, fractions: dict) -> "DegreeProfile":
        """
        This function turns a column-weight fraction table (e.g. {2: 0.75, 3: 0.25}) into a
        weight sequence of length n. Rounding leftovers go to the largest remainders.
        """
        total = sum(fractions.values())
        if total <= 0:
            raise CodeError("Column-weight fractions must have a positive sum.")
        exact = {int(w): n * frac / total for w, frac in fractions.items()}
        counts = {w: int(math.floor(x)) for w, x in exact.items()}
        leftover = n - sum(counts.values())
        by_remainder = sorted(exact, key=lambda w: (-(exact[w] - counts[w]), w))
        for w in by_remainder[:leftover]:
            counts[w] += 1
        weights = []
        for w in sorted(counts):
            weights.extend([w] * counts[w])
        return cls(tuple(weights), int(m))


def parse_weight_fractions(text: str) -> dict:
    """This function parses "2:0.75,3:0.25" into {2: 0.75, 3: 0.25}."""
    fractions = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            weight, frac = item.split(":")
            fractions[int(weight)] = float(frac)
        except ValueError:
            raise CodeError(f"Column-weight entry “{item}” is not of the form weight:fraction.")
    return fractions


def _systematic_form(f: Field, H: np.ndarray) -> tuple:
    """
    This function reduces H to row echelon form by Gaussian elimination over GF(q), choosing
    pivot columns from the right so that parity symbols sit at the end of the word. It
    returns (rank, pivot columns in row order, reduced rows).
    """
    mul = f.mul_table.astype(np.uint8)
    inv = f.inv_table.astype(np.uint8)
    A = H.astype(np.uint8)
    n_rows, n_cols = A.shape
    pivots = []
    r = 0
    for col in range(n_cols - 1, -1, -1):
        if r == n_rows:
            break
        candidates = np.nonzero(A[r:, col])[0]
        if candidates.size == 0:
            continue
        p = r + candidates[0]
        if p != r:
            A[[r, p]] = A[[p, r]]
        A[r] = mul[inv[A[r, col]], A[r]]
        factors = A[:, col].copy()
        factors[r] = 0
        targets = np.nonzero(factors)[0]
        if targets.size:
            # multiples[c] = c * (pivot row)
            multiples = mul[:, A[r]]
            A[targets] ^= multiples[factors[targets]]
        pivots.append(col)
        r += 1
    return r, np.array(pivots, dtype=np.int64), A[:r]


def build_code(f: Field, n: int, m: int, edges: Iterable) -> Code:
    """This function builds a Code from (check, variable, label) triples, 0-based, and derives its encoder."""
    edges = list(edges)
    if n < 1 or m < 1:
        raise CodeError(f"A code needs N >= 1 and M >= 1 (got N = {n}, M = {m}).")
    if edges:
        triples = np.array(edges, dtype=np.int64).reshape(-1, 3)
    else:
        triples = np.zeros((0, 3), dtype=np.int64)
    checks, variables, labels = triples[:, 0], triples[:, 1], triples[:, 2]
    if np.any((checks < 0) | (checks >= m)) or np.any((variables < 0) | (variables >= n)):
        raise CodeError("An edge refers to a check or variable outside the matrix.")
    if np.any((labels <= 0) | (labels >= f.q)):
        raise CodeError(f"Edge labels must be nonzero elements of GF({f.q}).")
    order = np.lexsort((variables, checks))
    checks, variables, labels = checks[order], variables[order], labels[order]
    if len(checks) > 1:
        same = (np.diff(checks) == 0) & (np.diff(variables) == 0)
        if np.any(same):
            raise CodeError("The same (check, variable) pair appears twice.")
    H = np.zeros((m, n), dtype=np.int64)
    H[checks, variables] = labels
    rank, pivots, reduced = _systematic_form(f, H)
    info = np.setdiff1d(np.arange(n), pivots)
    generator = reduced[:, info]
    if rank < m:
        logger.warning(
            f"H ({m} x {n} over GF({f.q})) has rank {rank} < {m}; K = {n - rank}, rate {(n - rank) / n:.4f}."
        )
    for array in (checks, variables, labels, info, pivots, generator):
        array.setflags(write=False)
    return Code(f, int(n), int(m), checks, variables, labels, int(rank), info, pivots, generator)


def peg_construct(f: Field, profile: DegreeProfile, seed: int) -> Code:
    """
    This function builds a Tanner graph by progressive edge growth. Variables are processed in
    non-decreasing degree order. Each new edge goes to a check outside the breadth-first subtree
    of the variable if one exists (lowest current degree), else to a check of lowest degree in
    the deepest level reached. Ties and labels come from a generator seeded with `seed`.
    """
    n = profile.n_vars
    m = profile.n_checks
    weights = np.asarray(profile.column_weights, dtype=np.int64)
    if n < 1 or m < 1:
        raise CodeError(f"A code needs N >= 1 and M >= 1 (got N = {n}, M = {m}).")
    if weights.min() < 1:
        raise CodeError("Column weights must be at least 1.")
    if weights.max() > m:
        raise CodeError(
            f"Column weight {int(weights.max())} exceeds the number of checks ({m})."
        )
    if profile.n_edges < m:
        logger.warning(
            f"{profile.n_edges} edges cannot reach all {m} checks; some rows stay empty."
        )
    rng = np.random.default_rng(seed)
    edge_checks = np.zeros(profile.n_edges, dtype=np.int64)
    edge_vars = np.zeros(profile.n_edges, dtype=np.int64)
    labels = np.zeros(profile.n_edges, dtype=np.int64)
    check_degrees = np.zeros(m, dtype=np.int64)
    count = 0
    for var in np.argsort(weights, kind="stable"):
        for _ in range(weights[var]):
            mask = _peg_candidates(edge_checks[:count], edge_vars[:count], m, n, var)
            candidates = np.nonzero(mask)[0]
            degrees = check_degrees[candidates]
            lowest = candidates[degrees == degrees.min()]
            check = int(lowest[rng.integers(lowest.size)]) if lowest.size > 1 else int(lowest[0])
            edge_checks[count] = check
            edge_vars[count] = var
            labels[count] = rng.integers(1, f.q)
            check_degrees[check] += 1
            count += 1
    code = build_code(f, n, m, np.stack((edge_checks, edge_vars, labels), axis=1))
    logger.info(
        f"PEG code over GF({f.q}): N = {n}, M = {m}, edges = {code.n_edges}, K = {code.k}, seed = {seed}."
    )
    return code


def _peg_candidates(
    edge_checks: np.ndarray, edge_vars: np.ndarray, m: int, n: int, var: int
) -> np.ndarray:
    """This function expands the subtree of `var` level by level over the current edges and returns the mask of eligible checks."""
    reached = np.zeros(m, dtype=bool)
    reached[edge_checks[edge_vars == var]] = True
    seen_vars = np.zeros(n, dtype=bool)
    seen_vars[var] = True
    frontier = reached.copy()
    while True:
        new_vars = np.zeros(n, dtype=bool)
        new_vars[edge_vars[frontier[edge_checks]]] = True
        new_vars &= ~seen_vars
        seen_vars |= new_vars
        new_checks = np.zeros(m, dtype=bool)
        new_checks[edge_checks[new_vars[edge_vars]]] = True
        new_checks &= ~reached
        if not new_checks.any():
            # The subtree stopped growing: any check outside it closes no cycle.
            return ~reached
        if (reached | new_checks).all():
            # Everything is reachable: take the deepest level.
            return new_checks
        reached |= new_checks
        frontier = new_checks


def syndrome(c: Code, word: np.ndarray) -> np.ndarray:
    """This function returns H * word over GF(q); the word is a codeword iff every component is 0."""
    word = np.asarray(word, dtype=np.int64)
    if word.shape != (c.n,):
        raise CodeError(f"Word length {word.size} does not match N = {c.n}.")
    if word.size and (word.min() < 0 or word.max() >= c.field.q):
        raise CodeError(f"Word symbols must lie in GF({c.field.q}).")
    products = c.field.mul_table[c.edge_labels, word[c.edge_vars]]
    result = np.zeros(c.m, dtype=np.int64)
    np.bitwise_xor.at(result, c.edge_checks, products)
    return result


def is_codeword(c: Code, word: np.ndarray) -> bool:
    return not np.any(syndrome(c, word))


def encode(c: Code, info: np.ndarray) -> np.ndarray:
    """This function places `info` on the information positions and solves the parity positions."""
    info = np.asarray(info, dtype=np.int64)
    if info.shape != (c.k,):
        raise CodeError(f"Information length {info.size} does not match K = {c.k}.")
    if info.size and (info.min() < 0 or info.max() >= c.field.q):
        raise CodeError(f"Information symbols must lie in GF({c.field.q}).")
    word = np.zeros(c.n, dtype=np.int64)
    word[c.info_positions] = info
    if c.rank:
        products = c.field.mul_table[c.parity_generator, info[None, :]]
        word[c.parity_positions] = np.bitwise_xor.reduce(products, axis=1)
    return word


def extract_info(c: Code, word: np.ndarray) -> np.ndarray:
    """This function reads the information symbols back out of a word."""
    return np.asarray(word, dtype=np.int64)[c.info_positions]


def girth(c: Code) -> Union[int, float]:
    """This function returns the length of the shortest Tanner-graph cycle, or math.inf for a forest."""
    n = c.n
    adjacency = [[] for _ in range(c.n + c.m)]
    for check, var in zip(c.edge_checks.tolist(), c.edge_vars.tolist()):
        adjacency[var].append(n + check)
        adjacency[n + check].append(var)
    best = math.inf
    # Every cycle passes through a variable node, so variable roots suffice.
    for root in range(n):
        dist = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in adjacency[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif w != parent[u]:
                    best = min(best, dist[u] + dist[w] + 1)
    return best if best == math.inf else int(best)


def save_alist(c: Code, path: Union[str, Path]) -> None:
    """This function writes the code in the extended alist format."""
    col_degrees = c.var_degrees
    row_degrees = c.check_degrees
    lines = [
        f"{c.n} {c.m} {c.field.q}",
        f"{int(col_degrees.max(initial=0))} {int(row_degrees.max(initial=0))}",
        " ".join(str(int(d)) for d in col_degrees),
        " ".join(str(int(d)) for d in row_degrees),
    ]
    for checks, labels in c.cols():
        lines.append(" ".join(f"{i + 1} {h}" for i, h in zip(checks.tolist(), labels.tolist())))
    for variables, labels in c.rows():
        lines.append(" ".join(f"{j + 1} {h}" for j, h in zip(variables.tolist(), labels.tolist())))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def _ints(lines: list, number: int) -> list:
    """This function parses one line (1-based number) into integers."""
    if number > len(lines):
        raise AlistFormatError(f"line {number}: unexpected end of file.")
    try:
        return [int(token) for token in lines[number - 1].split()]
    except ValueError:
        raise AlistFormatError(f"line {number}: non-integer entry.")


def _entries(values: list, degree: int, labeled: bool, number: int, bound: int) -> list:
    """This function splits one column or row line into (index, label) pairs, dropping zero padding."""
    if labeled:
        if len(values) % 2:
            raise AlistFormatError(f"line {number}: odd number of entries in (index, label) pairs.")
        pairs = list(zip(values[0::2], values[1::2]))
    else:
        pairs = [(index, 1) for index in values]
    while pairs and pairs[-1][0] == 0:
        pairs.pop()
    if len(pairs) != degree:
        raise AlistFormatError(f"line {number}: expected {degree} entries, found {len(pairs)}.")
    for index, label in pairs:
        if not 1 <= index <= bound:
            raise AlistFormatError(f"line {number}: index {index} is out of range (1 to {bound}).")
        if label == 0:
            raise AlistFormatError(f"line {number}: label 0 is not allowed.")
    return pairs


def load_alist(path: Union[str, Path], poly: Optional[int] = None) -> Code:
    """This function reads an extended (or classic binary) alist file into a Code."""
    with open(path, "r") as f:
        lines = f.read().split("\n")
    header = _ints(lines, 1)
    if len(header) == 3:
        n, m, q = header
        labeled = True
    elif len(header) == 2:
        n, m = header
        q = 2
        labeled = False
    else:
        raise AlistFormatError("line 1: expected “N M q” (or “N M” for a binary alist).")
    if n < 1 or m < 1:
        raise AlistFormatError(f"line 1: N and M must be positive (got {n}, {m}).")
    if q < 2 or q > 256 or q & (q - 1):
        raise AlistFormatError(f"line 1: q = {q} is not a power of two between 2 and 256.")
    f_q = field_new(q.bit_length() - 1, poly)
    if len(_ints(lines, 2)) != 2:
        raise AlistFormatError("line 2: expected the maximum column and row weights.")
    col_degrees = _ints(lines, 3)
    row_degrees = _ints(lines, 4)
    if len(col_degrees) != n:
        raise AlistFormatError(f"line 3: expected {n} column weights, found {len(col_degrees)}.")
    if len(row_degrees) != m:
        raise AlistFormatError(f"line 4: expected {m} row weights, found {len(row_degrees)}.")
    by_column = {}
    for j in range(n):
        number = 5 + j
        for i, h in _entries(_ints(lines, number), col_degrees[j], labeled, number, m):
            if h >= q:
                raise AlistFormatError(f"line {number}: label {h} is not an element of GF({q}).")
            if (i - 1, j) in by_column:
                raise AlistFormatError(f"line {number}: check {i} is listed twice.")
            by_column[(i - 1, j)] = h
    by_row = {}
    for i in range(m):
        number = 5 + n + i
        for j, h in _entries(_ints(lines, number), row_degrees[i], labeled, number, n):
            if by_column.get((i, j - 1)) != h:
                raise AlistFormatError(
                    f"line {number}: entry ({i + 1}, {j}) with label {h} does not match the column lists."
                )
            by_row[(i, j - 1)] = h
    if len(by_row) != len(by_column):
        raise AlistFormatError("Row and column lists describe different matrices.")
    edges = [(i, j, h) for (i, j), h in by_column.items()]
    return build_code(f_q, n, m, edges)
