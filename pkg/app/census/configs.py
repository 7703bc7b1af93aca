"""The nine subgraph configurations and the two counting modes."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Tuple


class CountMode(str, Enum):
    """COPIES: F's edges present on the vertex subset. INDUCED: exact edge/non-edge match."""

    COPIES = "copies"
    INDUCED = "induced"

    @classmethod
    def parse(cls, text: str) -> "CountMode":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown count mode {text!r}; use 'copies' or 'induced'")


@dataclass(frozen=True)
class SubgraphConfig:
    """
    A small pattern graph F with its size, edge count and automorphism count.

    kind is one of "isolate", "star", "triangle", "cycle"; k is the number of
    leaves for stars and the length for cycles (3 for the triangle).
    """

    kind: str
    k: int
    node_count: int
    edge_count: int
    aut_size: int
    name: str
    pattern_edges: Tuple[Tuple[int, int], ...] = field(repr=False, compare=False)

    def __post_init__(self):
        expected = _expected_sizes(self.kind, self.k)
        actual = (self.node_count, self.edge_count, self.aut_size)
        assert actual == expected, f"{self.name}: sizes {actual} != {expected}"
        assert len(self.pattern_edges) == self.edge_count

    @property
    def has_edges(self) -> bool:
        return self.edge_count > 0


def _expected_sizes(kind: str, k: int) -> Tuple[int, int, int]:
    if kind == "isolate":
        return 1, 0, 1
    if kind == "star":
        return k + 1, k, 2 if k == 1 else math.factorial(k)
    if kind in ("triangle", "cycle"):
        return k, k, 2 * k
    raise ValueError(f"unknown configuration kind {kind!r}")


def isolate() -> SubgraphConfig:
    return SubgraphConfig("isolate", 0, 1, 0, 1, "isolate", ())


def star(k: int) -> SubgraphConfig:
    if not 1 <= k <= 5:
        raise ValueError(f"star configurations cover k = 1..5, got {k}")
    nodes, edges, aut = _expected_sizes("star", k)
    pattern = tuple((0, leaf) for leaf in range(1, k + 1))
    return SubgraphConfig("star", k, nodes, edges, aut, f"star{k}", pattern)


def cycle(length: int) -> SubgraphConfig:
    if length not in (3, 4, 5):
        raise ValueError(f"cycle configurations cover lengths 3..5, got {length}")
    kind = "triangle" if length == 3 else "cycle"
    name = "triangle" if length == 3 else f"cycle{length}"
    pattern = tuple((i, (i + 1) % length) for i in range(length))
    return SubgraphConfig(kind, length, length, length, 2 * length, name, pattern)


def triangle() -> SubgraphConfig:
    return cycle(3)


def default_configuration_set() -> List[SubgraphConfig]:
    """[isolate, star1..star5, triangle, cycle4, cycle5] in this fixed order."""
    return [isolate()] + [star(k) for k in range(1, 6)] + [cycle(3), cycle(4), cycle(5)]


CONFIG_NAMES = tuple(c.name for c in default_configuration_set())


def config_by_name(name: str) -> SubgraphConfig:
    for config in default_configuration_set():
        if config.name == name.strip().lower():
            return config
    raise ValueError(f"unknown configuration {name!r}; choose from {', '.join(CONFIG_NAMES)}")


def parse_config_list(text: str) -> List[SubgraphConfig]:
    """Comma-separated names, e.g. "star1,star2,triangle". Order is kept; repeats rejected."""
    names = [part.strip() for part in text.split(",") if part.strip()]
    if not names:
        raise ValueError("configuration list is empty")
    configs = [config_by_name(name) for name in names]
    if len({c.name for c in configs}) != len(configs):
        raise ValueError(f"configuration list has repeats: {text!r}")
    return configs


def max_node_count(configs: Iterable[SubgraphConfig]) -> int:
    return max(c.node_count for c in configs)
