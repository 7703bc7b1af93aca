"""
Immutable simple undirected graphs and network samples.

A Graph is backed by a symmetric CSR adjacency matrix with sorted column
indices, which gives O(deg) neighbor iteration and cheap matrix products
for counting. Neighbor sets for O(1) membership tests are built lazily.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp


class Graph:
    """
    Simple undirected graph on vertices 0..n-1.

    Args:
        n: vertex count
        edges: iterable of (u, v) pairs; must be simple (no loops, no duplicates
            in either orientation)
        label: optional opaque identifier
        tokens: optional original vertex names, index-aligned
        latents: optional latent features (kernel-based random graphs)
    """

    def __init__(
        self,
        n: int,
        edges: Iterable[Tuple[int, int]] = (),
        label: Optional[str] = None,
        tokens: Optional[Sequence[str]] = None,
        latents: Optional[np.ndarray] = None,
    ):
        if n < 0:
            raise ValueError(f"vertex count must be non-negative, got {n}")
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            if pairs.min() < 0 or pairs.max() >= n:
                raise ValueError(f"edge endpoint out of range 0..{n - 1}")
            if np.any(pairs[:, 0] == pairs[:, 1]):
                raise ValueError("self-loops are not allowed")
            lo = np.minimum(pairs[:, 0], pairs[:, 1])
            hi = np.maximum(pairs[:, 0], pairs[:, 1])
            keys = lo * max(n, 1) + hi
            if np.unique(keys).size != keys.size:
                raise ValueError("duplicate edges are not allowed")
            pairs = np.column_stack([lo, hi])
        self._init_from_adjacency(n, _symmetric_csr(n, pairs), label, tokens, latents)

    def _init_from_adjacency(self, n, adjacency, label, tokens, latents) -> None:
        self._n = int(n)
        self._adjacency = adjacency
        degrees = np.diff(adjacency.indptr).astype(np.int64)
        degrees.setflags(write=False)
        self._degrees = degrees
        self._label = label
        self._tokens = tuple(tokens) if tokens is not None else None
        if tokens is not None and len(self._tokens) != n:
            raise ValueError("tokens must have one entry per vertex")
        if latents is not None:
            latents = np.array(latents, dtype=float)
            latents.setflags(write=False)
        self._latents = latents

    @classmethod
    def from_adjacency(
        cls,
        adjacency: sp.csr_matrix,
        label: Optional[str] = None,
        tokens: Optional[Sequence[str]] = None,
        latents: Optional[np.ndarray] = None,
    ) -> "Graph":
        """Wrap an already-simple symmetric 0/1 CSR matrix without re-validating edges."""
        adjacency = sp.csr_matrix(adjacency, dtype=np.int8)
        adjacency.sort_indices()
        graph = cls.__new__(cls)
        graph._init_from_adjacency(adjacency.shape[0], adjacency, label, tokens, latents)
        return graph

    @property
    def n(self) -> int:
        return self._n

    @property
    def label(self) -> Optional[str]:
        return self._label

    @property
    def tokens(self) -> Optional[Tuple[str, ...]]:
        """Original vertex names, index-aligned, when the graph was read from a file."""
        return self._tokens

    @property
    def latents(self) -> Optional[np.ndarray]:
        """Latent vertex features retained by the kernel sampler."""
        return self._latents

    @property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric CSR matrix with sorted indices. Treat as read-only."""
        return self._adjacency

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    @property
    def edge_count(self) -> int:
        return int(self._degrees.sum()) // 2

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor indices of v."""
        a = self._adjacency
        return a.indices[a.indptr[v] : a.indptr[v + 1]]

    @cached_property
    def neighbor_sets(self) -> Tuple[FrozenSet[int], ...]:
        return tuple(frozenset(self.neighbors(v).tolist()) for v in range(self._n))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[u]

    def edges(self) -> Iterator[Tuple[int, int]]:
        """Edges (u, v) with u < v, in lexicographic order."""
        upper = sp.triu(self._adjacency, k=1, format="coo")
        order = np.lexsort((upper.col, upper.row))
        for u, v in zip(upper.row[order].tolist(), upper.col[order].tolist()):
            yield u, v

    def token(self, v: int) -> str:
        return self.tokens[v] if self.tokens is not None else str(v)

    def relabel(self, permutation: Sequence[int]) -> "Graph":
        """Isomorphic copy where old vertex v becomes permutation[v]."""
        perm = np.asarray(permutation, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self._n)):
            raise ValueError("permutation must be a bijection on 0..n-1")
        edges = [(int(perm[u]), int(perm[v])) for u, v in self.edges()]
        return Graph(self._n, edges, label=self.label)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and (self._adjacency != other._adjacency).nnz == 0

    __hash__ = None

    def __repr__(self) -> str:
        name = f" {self.label!r}" if self.label is not None else ""
        return f"<Graph{name} n={self._n} m={self.edge_count}>"


def _symmetric_csr(n: int, pairs: np.ndarray) -> sp.csr_matrix:
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]]) if pairs.size else np.empty(0, np.int64)
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]]) if pairs.size else np.empty(0, np.int64)
    data = np.ones(rows.size, dtype=np.int8)
    adjacency = sp.csr_matrix((data, (rows, cols)), shape=(n, n), dtype=np.int8)
    adjacency.sort_indices()
    return adjacency


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> Graph:
    """
    Subgraph of g induced by `vertices`, reindexed 0..k-1 in the given order.

    Raises ValueError for an empty selection or out-of-range indices.
    """
    idx = np.asarray(list(vertices), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("induced subgraph needs at least one vertex")
    if idx.min() < 0 or idx.max() >= g.n:
        raise ValueError(f"vertex index out of range 0..{g.n - 1}")
    if np.unique(idx).size != idx.size:
        raise ValueError("induced subgraph vertices must be distinct")
    sub = g.adjacency[idx][:, idx]
    tokens = [g.tokens[i] for i in idx.tolist()] if g.tokens is not None else None
    latents = g.latents[idx] if g.latents is not None else None
    return Graph.from_adjacency(sub, label=g.label, tokens=tokens, latents=latents)


def complete_graph(n: int, label: Optional[str] = None) -> Graph:
    return Graph(n, combinations(range(n), 2), label=label)


def empty_graph(n: int, label: Optional[str] = None) -> Graph:
    return Graph(n, (), label=label)


def path_graph(n: int, label: Optional[str] = None) -> Graph:
    return Graph(n, ((i, i + 1) for i in range(n - 1)), label=label)


def cycle_graph(n: int, label: Optional[str] = None) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)], label=label)


@dataclass
class NetworkSample:
    """An ordered sample of graph observations G_1..G_N."""

    graphs: List[Graph]
    ids: List[str]
    labels: Optional[List[Optional[str]]] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.graphs) < 1:
            raise ValueError("a network sample needs at least one graph")
        if len(self.ids) != len(self.graphs):
            raise ValueError("ids and graphs must have the same length")
        if self.labels is not None and len(self.labels) != len(self.graphs):
            raise ValueError("labels and graphs must have the same length")
        seen = set()
        for graph_id in self.ids:
            if graph_id in seen:
                raise ValueError(f"duplicate graph id {graph_id!r}")
            seen.add(graph_id)

    def __len__(self) -> int:
        return len(self.graphs)

    @property
    def n_min(self) -> int:
        return min(g.n for g in self.graphs)

    def label_of(self, i: int) -> Optional[str]:
        return self.labels[i] if self.labels is not None else None

    @classmethod
    def from_graphs(cls, graphs: Sequence[Graph], prefix: str = "g") -> "NetworkSample":
        """Sample with ids taken from graph labels, or generated as prefix + index."""
        ids = [g.label if g.label is not None else f"{prefix}{i}" for i, g in enumerate(graphs)]
        return cls(graphs=list(graphs), ids=ids)
