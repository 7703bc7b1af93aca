"""
Exact subgraph counts and densities.

Copies-mode counts come from degrees and adjacency-matrix powers:

    star(k)   = sum_v C(d_v, k)
    triangle  = sum over ordered adjacent pairs of (A^2)_uv / 6
    cycle4    = sum over ordered pairs u != w of C((A^2)_uw, 2) / 4
    cycle5    = (tr A^5 - 5 tr A^3 - 5 sum_v (d_v - 2)(A^3)_vv) / 10

Matrix powers use dense float BLAS up to CONFIG.dense_limit vertices (all
entries stay far below 2**53, so they are exact) and integer scipy.sparse
products beyond. Every reduction ends in a Python int.

Induced-mode counts correct the copy counts where a short identity exists
and enumerate otherwise (independent leaf sets for stars, chordless
5-cycles by depth-first search).
"""

import logging
import math
from fractions import Fraction
from functools import cached_property
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from app.census.configs import CountMode, SubgraphConfig
from app.graphs.graph import Graph
from app.services.config import CONFIG
from app.services.errors import ConfigurationSizeError

logger = logging.getLogger(__name__)


def _exact_sum(values: np.ndarray) -> int:
    """Sum integer array entries without int64 wrap-around."""
    values = np.asarray(values)
    if values.size == 0:
        return 0
    bound = int(np.abs(values).max()) * values.size
    if bound < 2**62:
        return int(values.sum(dtype=np.int64))
    return int(values.astype(object).sum())


class CensusContext:
    """Per-graph cache of the matrix quantities shared by several configurations."""

    def __init__(self, g: Graph, dense_limit: Optional[int] = None):
        self.g = g
        self.dense = g.n <= (dense_limit if dense_limit is not None else CONFIG.dense_limit)

    @cached_property
    def _a(self):
        if self.dense:
            return self.g.adjacency.toarray().astype(np.float64)
        return self.g.adjacency.astype(np.int64)

    @cached_property
    def _a2_raw(self):
        return self._a @ self._a

    @cached_property
    def a2(self):
        if self.dense:
            return np.rint(self._a2_raw).astype(np.int64)
        return self._a2_raw

    @cached_property
    def a3_diag_and_tr5(self):
        if self.dense:
            a3 = np.rint(self._a2_raw @ self._a).astype(np.int64)
            tr5 = _exact_sum(self.a2 * a3)
            return np.diag(a3).copy(), tr5
        a3 = self._a2_raw @ self._a
        tr5 = _exact_sum(self._a2_raw.multiply(a3).tocsr().data)
        return a3.diagonal().astype(np.int64), tr5

    @cached_property
    def copies_triangle(self) -> int:
        if self.dense:
            mask = self._a > 0
            return _exact_sum(self.a2[mask]) // 6
        return _exact_sum(self.a2.multiply(self._a).tocsr().data) // 6

    @cached_property
    def copies_cycle4(self) -> int:
        if self.dense:
            common = self.a2.copy()
            np.fill_diagonal(common, 0)
            return _exact_sum(common * (common - 1) // 2) // 4
        upper = sp.triu(self.a2, k=1).tocsr().data.astype(np.int64)
        return _exact_sum(upper * (upper - 1) // 2) // 2

    @cached_property
    def copies_cycle5(self) -> int:
        a3_diag, tr5 = self.a3_diag_and_tr5
        tr3 = _exact_sum(a3_diag)
        weighted = _exact_sum((self.g.degrees - 2) * a3_diag)
        total = tr5 - 5 * tr3 - 5 * weighted
        assert total % 10 == 0, f"closed-walk identity gave {total}, not a multiple of 10"
        return total // 10

    @cached_property
    def edge_common_neighbors(self) -> np.ndarray:
        """|N(u) & N(v)| for every edge u < v."""
        upper = sp.triu(self.g.adjacency, k=1, format="coo")
        if self.dense:
            return self.a2[upper.row, upper.col]
        return np.asarray(self.a2[upper.row, upper.col]).ravel().astype(np.int64)

    @cached_property
    def k4_count(self) -> int:
        nbrs = self.g.neighbor_sets
        total = 0
        for u, v in self.g.edges():
            common = [w for w in nbrs[u] & nbrs[v] if w > v]
            for i, w in enumerate(common):
                total += sum(1 for x in common[i + 1 :] if x in nbrs[w])
        return total

    def star(self, k: int) -> int:
        if k == 1:
            # a 1-star is an edge; the degree binomial would see it from both ends
            return self.g.edge_count
        degrees, multiplicity = np.unique(self.g.degrees, return_counts=True)
        return sum(
            math.comb(int(d), k) * int(m) for d, m in zip(degrees, multiplicity) if d >= k
        )

    def isolates(self) -> int:
        return int(np.count_nonzero(self.g.degrees == 0))

    def induced_star(self, k: int) -> int:
        if k == 1:
            return self.g.edge_count
        if k == 2:
            return self.star(2) - 3 * self.copies_triangle
        nbrs = self.g.neighbor_sets
        return sum(
            _independent_sets(sorted(nbrs[v]), k, nbrs) for v in range(self.g.n)
        )

    def induced_cycle4(self) -> int:
        t = self.edge_common_neighbors.astype(np.int64)
        diamonds = _exact_sum(t * (t - 1) // 2)
        return self.copies_cycle4 - diamonds + 3 * self.k4_count

    def induced_cycle5(self) -> int:
        return _chordless_five_cycles(self.g.neighbor_sets)


def _independent_sets(candidates: List[int], k: int, nbrs) -> int:
    """Number of k-subsets of candidates with no edge inside."""
    if k == 0:
        return 1
    if len(candidates) < k:
        return 0
    if k == 1:
        return len(candidates)
    total = 0
    for i, v in enumerate(candidates):
        rest = [w for w in candidates[i + 1 :] if w not in nbrs[v]]
        total += _independent_sets(rest, k - 1, nbrs)
    return total


def _chordless_five_cycles(nbrs) -> int:
    # each cycle is visited once: s is its smallest vertex and a < d fixes direction
    total = 0
    for s in range(len(nbrs)):
        ns = nbrs[s]
        for a in ns:
            if a <= s:
                continue
            na = nbrs[a]
            for b in na:
                if b <= s or b in ns:
                    continue
                nb = nbrs[b]
                for c in nb:
                    if c <= s or c == a or c in ns or c in na:
                        continue
                    for d in nbrs[c]:
                        if d > a and d in ns and d not in na and d not in nb:
                            total += 1
    return total


def _check_fits(g: Graph, config: SubgraphConfig) -> None:
    if g.n < config.node_count:
        graph = f"graph {g.label!r}" if g.label is not None else "the graph"
        raise ConfigurationSizeError(
            f"configuration {config.name} needs {config.node_count} vertices "
            f"but {graph} has {g.n}"
        )


def _count_with(ctx: CensusContext, config: SubgraphConfig, mode: CountMode) -> int:
    _check_fits(ctx.g, config)
    mode = CountMode(mode)
    if config.kind == "isolate":
        return ctx.isolates()
    if config.kind == "triangle":
        return ctx.copies_triangle
    if config.kind == "star":
        return ctx.star(config.k) if mode is CountMode.COPIES else ctx.induced_star(config.k)
    if config.k == 4:
        return ctx.copies_cycle4 if mode is CountMode.COPIES else ctx.induced_cycle4()
    return ctx.copies_cycle5 if mode is CountMode.COPIES else ctx.induced_cycle5()


def count(g: Graph, config: SubgraphConfig, mode: CountMode = CountMode.COPIES) -> int:
    """
    Exact number of occurrences of config in g.

    Isolates are degree-0 vertices in both modes.

    Raises:
        ConfigurationSizeError: config has more vertices than g
    """
    return _count_with(CensusContext(g), config, mode)


def max_count(n: int, config: SubgraphConfig) -> int:
    """
    Largest possible count of config on n vertices: the copy count in K_n,
    n! / ((n - |F|)! |Aut(F)|), and n for isolates.
    """
    if n < config.node_count or n < 1:
        raise ConfigurationSizeError(
            f"configuration {config.name} needs {config.node_count} vertices, n = {n}"
        )
    if config.kind == "isolate":
        return n
    return math.perm(n, config.node_count) // config.aut_size


def _density(value: int, maximum: int) -> float:
    # exact rational, rounded once
    return float(Fraction(value, maximum))


def density(g: Graph, config: SubgraphConfig, mode: CountMode = CountMode.COPIES) -> float:
    """count / max_count, in [0, 1]."""
    return _density(count(g, config, mode), max_count(g.n, config))


def density_vector(
    g: Graph, configs: Sequence[SubgraphConfig], mode: CountMode = CountMode.COPIES
) -> np.ndarray:
    """Densities of every configuration in order, sharing matrix work across them."""
    for config in configs:
        _check_fits(g, config)
    ctx = CensusContext(g)
    return np.array(
        [_density(_count_with(ctx, c, mode), max_count(g.n, c)) for c in configs],
        dtype=float,
    )


def census_rows(
    g: Graph, configs: Sequence[SubgraphConfig], mode: CountMode = CountMode.COPIES
) -> List[dict]:
    """(config, count, max_count, density) records for one graph."""
    for config in configs:
        _check_fits(g, config)
    ctx = CensusContext(g)
    rows = []
    for config in configs:
        value = _count_with(ctx, config, mode)
        maximum = max_count(g.n, config)
        rows.append(
            {
                "config": config.name,
                "count": value,
                "max_count": maximum,
                "density": _density(value, maximum),
            }
        )
    return rows


def _falling_choose(d: np.ndarray, k: int) -> np.ndarray:
    out = np.ones_like(d)
    for i in range(k):
        out = out * (d - i)
    return out // math.factorial(k)


def batch_copy_counts(adjacency: np.ndarray, configs: Sequence[SubgraphConfig]) -> np.ndarray:
    """
    Copy counts for a stack of small dense graphs.

    Args:
        adjacency: (B, t, t) symmetric 0/1 array, zero diagonal
        configs: configurations, each with at most t vertices

    Returns:
        (B, p) int64 array, same values as count() on each graph.
    """
    a = np.asarray(adjacency, dtype=np.int64)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError("adjacency stack must have shape (B, t, t)")
    t = a.shape[1]
    for config in configs:
        if t < config.node_count:
            raise ConfigurationSizeError(
                f"configuration {config.name} needs {config.node_count} vertices "
                f"but the stacked graphs have {t}"
            )
    deg = a.sum(axis=2)
    a2 = a @ a
    a3 = a2 @ a
    a3_diag = np.diagonal(a3, axis1=1, axis2=2)
    out = np.empty((a.shape[0], len(configs)), dtype=np.int64)
    for col, config in enumerate(configs):
        if config.kind == "isolate":
            out[:, col] = (deg == 0).sum(axis=1)
        elif config.kind == "star":
            if config.k == 1:
                out[:, col] = deg.sum(axis=1) // 2
            else:
                out[:, col] = _falling_choose(deg, config.k).sum(axis=1)
        elif config.kind == "triangle":
            out[:, col] = a3_diag.sum(axis=1) // 6
        elif config.k == 4:
            common = a2 * (1 - np.eye(t, dtype=np.int64))
            out[:, col] = (common * (common - 1) // 2).sum(axis=(1, 2)) // 4
        else:
            tr5 = (a2 * a3).sum(axis=(1, 2))
            tr3 = a3_diag.sum(axis=1)
            weighted = ((deg - 2) * a3_diag).sum(axis=1)
            out[:, col] = (tr5 - 5 * tr3 - 5 * weighted) // 10
    return out


def batch_copy_densities(adjacency: np.ndarray, configs: Sequence[SubgraphConfig]) -> np.ndarray:
    """(B, p) copy densities of a stack of small dense graphs."""
    t = np.asarray(adjacency).shape[-1]
    maxima = np.array([max_count(t, c) for c in configs], dtype=np.int64)
    # both operands are exact doubles below 2**53, so the quotient is correctly rounded
    return batch_copy_counts(adjacency, configs).astype(float) / maxima.astype(float)
