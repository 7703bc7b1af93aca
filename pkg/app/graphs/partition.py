"""
Constrained random vertex partitions for the sampling-based embedding.

Labels are drawn i.i.d. uniform over K classes conditional on every class
holding at least tau vertices. The conditional law is realized by rejection;
when rejection keeps failing, a constructive scheme takes over.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from app.graphs.graph import Graph, induced_subgraph
from app.services.config import CONFIG
from app.services.errors import InfeasiblePartitionError
from app.services.utils import make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PartitionPlan:
    """Class labels 1..K per vertex plus the parameters that produced them."""

    assignment: Tuple[int, ...]
    K: int
    tau: int
    seed: Optional[Tuple[int, ...]]
    method: str = "rejection"

    def classes(self) -> List[np.ndarray]:
        """Vertex indices of each class, ascending, in class order 1..K."""
        labels = np.asarray(self.assignment)
        return [np.flatnonzero(labels == k) for k in range(1, self.K + 1)]

    def class_sizes(self) -> List[int]:
        counts = np.bincount(np.asarray(self.assignment) - 1, minlength=self.K)
        return counts.tolist()


def _describe_seed(seed) -> Optional[Tuple[int, ...]]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy
        if isinstance(entropy, (int, np.integer)):
            return (int(entropy),)
        return tuple(int(e) for e in entropy)
    return None


def check_feasible(n: int, K: int, tau: int) -> None:
    """Raise InfeasiblePartitionError unless K classes of size >= tau fit in n vertices."""
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    if tau < 1:
        raise ValueError(f"tau must be at least 1, got {tau}")
    if K * tau > n:
        raise InfeasiblePartitionError(
            f"cannot split {n} vertices into K={K} classes of at least tau={tau}: "
            f"K*tau = {K * tau} > n = {n} (the constraint is tau <= n_min / K)"
        )


def _constructive_labels(rng: np.random.Generator, n: int, K: int, tau: int) -> np.ndarray:
    # shuffle, deal the first K*tau round-robin, rest i.i.d. uniform
    order = rng.permutation(n)
    labels = np.empty(n, dtype=np.int64)
    dealt = K * tau
    labels[order[:dealt]] = np.arange(dealt) % K
    labels[order[dealt:]] = rng.integers(0, K, size=n - dealt)
    return labels


def draw_labels(
    n: int, K: int, tau: int, seed, max_attempts: Optional[int] = None
) -> Tuple[np.ndarray, str]:
    """
    Draw 0-based class labels for n vertices.

    Returns:
        (labels, method) where method is "rejection", "exact" or "constructive".
    """
    check_feasible(n, K, tau)
    rng = make_rng(seed)
    if K * tau == n:
        # every class has exactly tau vertices; conditioned on that, the
        # multinomial law is uniform over equal-size partitions
        return _constructive_labels(rng, n, K, tau), "exact"

    attempts = max_attempts if max_attempts is not None else CONFIG.partition_attempts
    for _ in range(attempts):
        labels = rng.integers(0, K, size=n)
        if np.bincount(labels, minlength=K).min() >= tau:
            return labels, "rejection"

    logger.debug(
        f"rejection sampling failed {attempts} times for n={n}, K={K}, tau={tau}; "
        "using constructive partition"
    )
    return _constructive_labels(rng, n, K, tau), "constructive"


def draw_plan(
    n: int, K: int, tau: int, seed, max_attempts: Optional[int] = None
) -> PartitionPlan:
    """Draw a partition of n vertices without building the class subgraphs."""
    labels, method = draw_labels(n, K, tau, seed, max_attempts)
    return PartitionPlan(
        assignment=tuple((labels + 1).tolist()),
        K=K,
        tau=tau,
        seed=_describe_seed(seed),
        method=method,
    )


def partition(
    g: Graph, K: int, tau: int, seed, max_attempts: Optional[int] = None
) -> Tuple[PartitionPlan, List[Graph]]:
    """
    Randomly split g's vertex set into K classes of at least tau vertices.

    Args:
        g: graph to split
        K: number of classes
        tau: minimum class size
        seed: int, SeedSequence or Generator; fixes the result bitwise
        max_attempts: rejection attempts before the constructive fallback

    Returns:
        The plan and the K induced subgraphs in class order.
    """
    plan = draw_plan(g.n, K, tau, seed, max_attempts)
    classes = plan.classes()
    sizes = [len(c) for c in classes]
    assert sum(sizes) == g.n and min(sizes) >= tau, f"bad partition sizes {sizes}"
    return plan, [induced_subgraph(g, c) for c in classes]
