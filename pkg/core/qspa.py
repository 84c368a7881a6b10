"""
This module contains the FFT-QSPA decoder: q-ary sum-product decoding in the probability
domain, with check-node convolutions done in the Walsh-Hadamard domain.

Schedule is flooding: every check node, then every variable node, then the posterior and
hard decision, with an early exit once the syndrome is zero (unless early_stop is off).
Leave-one-out products use forward/backward prefix products, never division.
"""

import copy
import logging
from dataclasses import dataclass, field as dataclass_field
from functools import lru_cache
from typing import Optional

import numpy as np

from .codes import Code
from .galois import Field
from .messages import OpCounter, hard_decision, iwht, normalize, wht
from .utilities import DegenerateMessageError


logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 30


@dataclass
class DecodeResult:
    decided: np.ndarray
    converged: bool
    iterations_used: int
    op_counts: OpCounter
    posteriors: Optional[np.ndarray] = dataclass_field(default=None, repr=False)
    failure: Optional[str] = None
    # Set only in verify_fixed_point mode: did one extra iteration keep the decision?
    stable: Optional[bool] = None

    def per_iteration(self) -> dict:
        """This function returns the op counts divided by the iterations used (memory is not divided)."""
        iterations = max(self.iterations_used, 1)
        counts = self.op_counts.as_dict()
        return {
            key: (val if key == "peak_message_memory" else val / iterations)
            for key, val in counts.items()
        }


def _leave_one_out(x: np.ndarray, counter: Optional[OpCounter] = None) -> np.ndarray:
    """
    This function returns, for x of shape (groups, d, q), the products over axis 1 of all
    entries but one, via exclusive prefix and suffix products.
    """
    ones = np.ones_like(x[:, :1])
    prefix = np.concatenate([ones, np.cumprod(x[:, :-1], axis=1)], axis=1)
    suffix = np.concatenate([np.cumprod(x[:, :0:-1], axis=1)[:, ::-1], ones], axis=1)
    if counter is not None:
        groups, d, q = x.shape
        counter.float_mul += groups * q * max(3 * d - 4, 0)
    return prefix * suffix


@dataclass(frozen=True, eq=False)
class _Layout:
    """Index arrays that let one numpy call process every node of a given degree."""

    field: Field
    check_groups: tuple  # (edge index array of shape (checks, d),) per degree d
    var_groups: tuple  # (variable ids, edge index array of shape (vars, d)) per degree d
    gather_in: np.ndarray  # gather_in[e, y] = h_e^-1 * y
    gather_out: np.ndarray  # gather_out[e, x] = h_e * x


@lru_cache(maxsize=32)
def _layout(c: Code) -> _Layout:
    f = c.field
    check_degrees = c.check_degrees
    starts = np.concatenate(([0], np.cumsum(check_degrees)[:-1]))
    check_groups = []
    for d in np.unique(check_degrees[check_degrees > 0]):
        rows = np.nonzero(check_degrees == d)[0]
        check_groups.append(starts[rows][:, None] + np.arange(d)[None, :])
    var_degrees = c.var_degrees
    by_var = np.lexsort((c.edge_checks, c.edge_vars))
    var_starts = np.concatenate(([0], np.cumsum(var_degrees)[:-1]))
    var_groups = []
    for d in np.unique(var_degrees[var_degrees > 0]):
        variables = np.nonzero(var_degrees == d)[0]
        positions = var_starts[variables][:, None] + np.arange(d)[None, :]
        var_groups.append((variables, by_var[positions]))
    gather_in = f.mul_table[f.inv_table[c.edge_labels]]
    gather_out = f.mul_table[c.edge_labels]
    return _Layout(f, tuple(check_groups), tuple(var_groups), gather_in, gather_out)


class DecoderWorkspace:
    """
    Per-edge message storage for decoding one block: Q (variable to check) and R (check to
    variable), one distribution of q reals per edge and direction, plus the priors D^(0).
    One workspace serves one block at a time.
    """

    def __init__(self, c: Code, priors: np.ndarray, counter: Optional[OpCounter] = None):
        self.code = c
        self.layout = _layout(c)
        self.counter = counter if counter is not None else OpCounter()
        self.priors = normalize(priors)
        self.Q = self.priors[c.edge_vars]
        self.R = np.full_like(self.Q, 1.0 / c.field.q)
        self.posteriors = self.priors.copy()
        self.counter.peak_message_memory = 2 * c.n_edges * (c.field.q - 1)

    def check_update(self) -> None:
        """This function computes every R_{i->j} from the current Q messages."""
        layout = self.layout
        permuted = np.take_along_axis(self.Q, layout.gather_in, axis=1)
        self.counter.gf_mul += self.code.n_edges
        spectra = wht(permuted, self.counter)
        products = np.empty_like(spectra)
        for idx in layout.check_groups:
            products[idx] = _leave_one_out(spectra[idx], self.counter)
        sums = iwht(products, self.counter)
        self.R = normalize(np.take_along_axis(sums, layout.gather_out, axis=1))
        self.counter.gf_mul += self.code.n_edges

    def variable_update(self) -> None:
        """This function computes every Q_{j->i} and the posteriors from the current R messages."""
        Q = np.empty_like(self.Q)
        posteriors = self.priors.copy()
        q = self.code.field.q
        for variables, idx in self.layout.var_groups:
            incoming = self.R[idx]
            prior = self.priors[variables][:, None, :]
            Q[idx] = normalize(_leave_one_out(incoming, self.counter) * prior)
            posteriors[variables] = normalize(
                self.priors[variables] * np.prod(incoming, axis=1)
            )
            self.counter.float_mul += 2 * idx.size * q
        self.Q = Q
        self.posteriors = posteriors

    def iterate(self) -> np.ndarray:
        """This function runs one flooding iteration and returns the hard decision."""
        self.check_update()
        self.variable_update()
        return hard_decision(self.posteriors)


def _syndrome_is_zero(c: Code, word: np.ndarray) -> bool:
    products = c.field.mul_table[c.edge_labels, word[c.edge_vars]]
    result = np.zeros(c.m, dtype=np.int64)
    np.bitwise_xor.at(result, c.edge_checks, products)
    return not result.any()


def decode(
    c: Code,
    priors: np.ndarray,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    early_stop: bool = True,
    verify_fixed_point: bool = False,
) -> DecodeResult:
    """
    This function decodes one block. priors has shape (N, q). A degenerate message ends decoding
    with converged = False and a failure text instead of raising.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1 (got {max_iter}).")
    priors = np.asarray(priors, dtype=float)
    if priors.shape != (c.n, c.field.q):
        raise ValueError(f"priors must have shape ({c.n}, {c.field.q}), got {priors.shape}.")
    counter = OpCounter()
    try:
        workspace = DecoderWorkspace(c, priors, counter)
    except DegenerateMessageError as err:
        return DecodeResult(hard_decision(priors), False, 0, counter, priors, str(err))
    decided = hard_decision(workspace.posteriors)
    converged = False
    iterations = 0
    try:
        for iterations in range(1, max_iter + 1):
            decided = workspace.iterate()
            converged = _syndrome_is_zero(c, decided)
            logger.debug(f"iteration {iterations}: syndrome zero = {converged}")
            if converged and early_stop:
                break
    except DegenerateMessageError as err:
        logger.debug(f"Decoding stopped at iteration {iterations}: {err}")
        return DecodeResult(decided, False, iterations, counter, workspace.posteriors, str(err))
    stable = None
    if verify_fixed_point and converged:
        extra = copy.copy(workspace)
        extra.counter = OpCounter()
        try:
            stable = bool(np.array_equal(extra.iterate(), decided))
        except DegenerateMessageError:
            stable = False
        if not stable:
            logger.warning("Decision changed after convergence.")
    return DecodeResult(decided, converged, iterations, counter, workspace.posteriors, None, stable)


def check_node_update(f: Field, labels, incoming: np.ndarray) -> np.ndarray:
    """
    This function returns R_{i->j} for every neighbor j of one check node with edge labels
    `labels` and incoming messages Q_{k->i} (shape (d, q)).
    """
    labels = np.asarray(labels, dtype=np.int64)
    incoming = np.asarray(incoming, dtype=float)
    if labels.ndim != 1 or incoming.shape != (labels.size, f.q) or labels.size < 2:
        raise ValueError("check_node_update() needs d >= 2 labels and a (d, q) message array.")
    permuted = np.take_along_axis(incoming, f.mul_table[f.inv_table[labels]], axis=1)
    spectra = wht(permuted)[None]
    sums = iwht(_leave_one_out(spectra)[0])
    return normalize(np.take_along_axis(sums, f.mul_table[labels], axis=1))


def variable_node_update(prior: np.ndarray, incoming: np.ndarray, exclude: int) -> np.ndarray:
    """This function returns Q_{j->i}: the prior times every incoming R_{k->j} except `exclude`, normalized."""
    incoming = np.asarray(incoming, dtype=float)
    keep = [k for k in range(incoming.shape[0]) if k != exclude]
    product = np.asarray(prior, dtype=float) * np.prod(incoming[keep], axis=0)
    return normalize(product)
