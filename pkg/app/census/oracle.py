"""
Brute-force subgraph counting, used as a test oracle.

Shares no code with the fast counters: it walks every vertex subset of the
pattern's size and tries every placement of the pattern on it.
"""

from itertools import combinations, permutations

from app.census.configs import CountMode, SubgraphConfig
from app.graphs.graph import Graph
from app.services.errors import ConfigurationSizeError

ORACLE_MAX_VERTICES = 12


def brute_force_count(g: Graph, config: SubgraphConfig, mode: CountMode = CountMode.COPIES) -> int:
    """
    Count config in g by exhaustive enumeration (g.n <= 12).

    Copies: placements of F whose edges all exist, divided by |Aut(F)|.
    Induced: subsets whose induced edge set equals some placement of F.
    """
    if g.n > ORACLE_MAX_VERTICES:
        raise ValueError(
            f"brute-force counting is limited to {ORACLE_MAX_VERTICES} vertices, graph has {g.n}"
        )
    if g.n < config.node_count:
        raise ConfigurationSizeError(
            f"configuration {config.name} needs {config.node_count} vertices, graph has {g.n}"
        )
    mode = CountMode(mode)
    edge_set = {frozenset(e) for e in g.edges()}

    if config.kind == "isolate":
        touched = set().union(*edge_set) if edge_set else set()
        return sum(1 for v in range(g.n) if v not in touched)

    total = 0
    for subset in combinations(range(g.n), config.node_count):
        present = {frozenset((u, v)) for u, v in combinations(subset, 2)} & edge_set
        placements = 0
        for image in permutations(subset):
            mapped = {frozenset((image[a], image[b])) for a, b in config.pattern_edges}
            if mode is CountMode.COPIES:
                placements += mapped <= present
            elif mapped == present:
                placements += 1
                break
        if mode is CountMode.COPIES:
            total += placements // config.aut_size
        else:
            total += placements
    return total
