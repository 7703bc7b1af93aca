"""Sampling graphs from a kernel-based random graph model."""

import logging
from typing import List, Optional

import numpy as np
import scipy.sparse as sp

from app.graphs.graph import Graph, NetworkSample
from app.krg.kernels import Kernel
from app.services.utils import chunked, make_rng, ordered_map, sub_seed

logger = logging.getLogger(__name__)

ROW_BLOCK = 256


def sample_graph(n: int, kernel: Kernel, seed, label: Optional[str] = None) -> Graph:
    """
    Draw latents x_1..x_n ~ U(0, 1), then join each pair i < j independently
    with probability f(x_i, x_j). Latents are kept on the returned graph.

    Pairs are visited in row-major order of the upper triangle, a block of
    rows at a time, so the result depends only on (n, kernel, seed).
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = make_rng(seed)
    x = rng.random(n)
    rows: List[np.ndarray] = []
    cols: List[np.ndarray] = []
    for block in chunked(n, ROW_BLOCK):
        starts = np.arange(block.start, block.stop)
        lengths = n - 1 - starts
        if lengths.sum() == 0:
            continue
        i = np.repeat(starts, lengths)
        # column offsets restart at row + 1 for every row in the block
        j = np.arange(lengths.sum()) - np.repeat(np.cumsum(lengths) - lengths, lengths) + i + 1
        hit = rng.random(i.size) < kernel.evaluate(x[i], x[j])
        rows.append(i[hit])
        cols.append(j[hit])

    u = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    v = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    data = np.ones(2 * u.size, dtype=np.int8)
    adjacency = sp.csr_matrix(
        (data, (np.concatenate([u, v]), np.concatenate([v, u]))), shape=(n, n)
    )
    return Graph.from_adjacency(adjacency, label=label, latents=x)


def sample_network(
    N: int, n: int, kernel: Kernel, seed: int, prefix: str = "g", threads: Optional[int] = None
) -> NetworkSample:
    """N independent graphs; graph i uses sub_seed(seed, i)."""
    ids = [f"{prefix}{i + 1:0{max(len(str(N)), 3)}d}" for i in range(N)]
    graphs = ordered_map(
        lambda i: sample_graph(n, kernel, sub_seed(seed, i), label=ids[i]),
        list(range(N)),
        threads,
    )
    logger.debug(f"sampled {N} graphs of {n} vertices from {kernel.spec()}")
    return NetworkSample(graphs=graphs, ids=ids, meta={"kernel": kernel.spec(), "seed": seed})


def sample_cells(K: int, tau: int, kernel: Kernel, rng: np.random.Generator) -> np.ndarray:
    """
    Adjacency stack (K, tau, tau) of K independent tau-vertex graphs.

    These are distributed exactly like the K induced subgraphs of a
    K*tau-vertex graph under a uniformly random equal-size partition:
    latents are i.i.d. and edges are independent given the latents, so
    disjoint vertex classes never share randomness.
    """
    if K < 1 or tau < 1:
        raise ValueError(f"K and tau must be positive, got K={K}, tau={tau}")
    x = rng.random((K, tau))
    probs = kernel.evaluate(x[:, :, None], x[:, None, :])
    upper = np.triu(rng.random((K, tau, tau)) < probs, k=1)
    return (upper | np.swapaxes(upper, 1, 2)).astype(np.int8)
