"""
Sample-level embeddings: PCAN (densities of whole graphs) and sPCAN
(densities averaged over K random induced subgraphs per graph).

Workflow of both pipelines:
1. Compute a density vector per graph (sPCAN: per partition class, then average)
2. Stack the vectors as columns of a p x N matrix, in sample order
3. Standardize rows (center, optionally unit sd)
4. Eigendecompose the 1/N covariance and project the graphs onto the loadings
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from app.analysis.pca import DensityMatrix, PcaResult, pca, standardize_rows
from app.census.configs import (
    CountMode,
    SubgraphConfig,
    default_configuration_set,
    max_node_count,
)
from app.census.counting import batch_copy_densities, density_vector
from app.graphs.graph import NetworkSample, induced_subgraph
from app.graphs.partition import PartitionPlan, draw_plan
from app.services.config import CONFIG
from app.services.errors import ConfigurationSizeError, InfeasiblePartitionError
from app.services.utils import ordered_map, sub_seed

logger = logging.getLogger(__name__)

# copy counts of classes up to this size run as one stacked batch per size
BATCH_CELL_LIMIT = 64


@dataclass
class PcanSettings:
    """Inputs shared by both pipelines; seed, K and tau only matter to sPCAN."""

    configs: List[SubgraphConfig] = field(default_factory=default_configuration_set)
    r: Union[int, str] = "all"
    mode: CountMode = CountMode.COPIES
    unit_sd: bool = True
    seed: int = 0
    K: Optional[int] = None
    tau: Optional[int] = None
    threads: Optional[int] = None

    def __post_init__(self):
        if not self.configs:
            raise ValueError("at least one subgraph configuration is required")
        self.mode = CountMode(self.mode)
        if self.K is not None and self.K < 1:
            raise ValueError(f"K must be at least 1, got {self.K}")
        if self.tau is not None and self.tau < 1:
            raise ValueError(f"tau must be at least 1, got {self.tau}")


def _bound_text(configs: List[SubgraphConfig], n_min: int, K: int, tau: int) -> str:
    return (
        f"2*max|F_j| <= tau <= n_min/K requires "
        f"{2 * max_node_count(configs)} <= {tau} <= {n_min}/{K}"
    )


def tau_k_for_size(n_min: int, configs: List[SubgraphConfig]) -> Tuple[int, int]:
    """
    Default (tau, K): the smallest admissible tau = 2*max|F_j| and the largest
    K = floor(n_min / tau).
    """
    tau = 2 * max_node_count(configs)
    if tau > n_min:
        raise InfeasiblePartitionError(
            f"smallest graph has {n_min} vertices but 2*max|F_j| = {tau}; "
            f"drop the largest configurations so that 2*max|F_j| <= n_min "
            f"(bound: 2*max|F_j| <= tau <= n_min/K)"
        )
    K = n_min // tau
    logger.info(f"default tau={tau}, K={K} (n_min={n_min}): {_bound_text(configs, n_min, K, tau)}")
    return tau, K


def default_tau_k(sample: NetworkSample, configs: List[SubgraphConfig]) -> Tuple[int, int]:
    """Default (tau, K) for a sample, driven by its smallest graph."""
    return tau_k_for_size(sample.n_min, configs)


def resolve_tau_k(sample: NetworkSample, settings: PcanSettings) -> Tuple[int, int]:
    """Fill in whichever of tau / K is missing, then enforce the partition-size bound."""
    n_min = sample.n_min
    floor_tau = 2 * max_node_count(settings.configs)
    if settings.tau is None and settings.K is None:
        return default_tau_k(sample, settings.configs)
    tau = settings.tau if settings.tau is not None else floor_tau
    K = settings.K if settings.K is not None else n_min // tau
    if tau < floor_tau or K < 1 or K * tau > n_min:
        raise InfeasiblePartitionError(
            f"infeasible partition for n_min={n_min}: {_bound_text(settings.configs, n_min, max(K, 1), tau)}"
        )
    return tau, K


def _check_sample(sample: NetworkSample, configs: List[SubgraphConfig]) -> None:
    if len(sample) < 2:
        raise ValueError(f"need at least 2 graphs, got {len(sample)}")
    for graph_id, g in zip(sample.ids, sample.graphs):
        for config in configs:
            if g.n < config.node_count:
                raise ConfigurationSizeError(
                    f"graph {graph_id!r} has {g.n} vertices, too few for "
                    f"configuration {config.name} ({config.node_count} vertices)"
                )


def density_matrix(sample: NetworkSample, settings: PcanSettings) -> np.ndarray:
    """Raw p x N matrix of whole-graph densities, columns in sample order."""
    columns = ordered_map(
        lambda g: density_vector(g, settings.configs, settings.mode),
        sample.graphs,
        settings.threads,
    )
    return np.column_stack(columns)


def pcan(sample: NetworkSample, settings: PcanSettings) -> Tuple[DensityMatrix, PcaResult]:
    """
    PCA of whole-graph configuration densities.

    Raises:
        ValueError: fewer than 2 graphs
        ConfigurationSizeError: a configuration does not fit some graph
        DegenerateDataError: no configuration varies across the sample
    """
    _check_sample(sample, settings.configs)
    logger.info(f"PCAN: {len(sample)} graphs, {len(settings.configs)} configurations")
    raw = density_matrix(sample, settings)
    d = standardize_rows(
        raw,
        unit_sd=settings.unit_sd,
        row_names=[c.name for c in settings.configs],
        col_ids=sample.ids,
    )
    return d, pca(d, settings.r)


def _class_densities(g, plan: PartitionPlan, settings: PcanSettings) -> np.ndarray:
    """K x p densities of the class subgraphs, rows in class order."""
    classes = plan.classes()
    rows = np.empty((len(classes), len(settings.configs)))
    small = []
    if settings.mode is CountMode.COPIES:
        small = [k for k, members in enumerate(classes) if len(members) <= BATCH_CELL_LIMIT]
    if small:
        dense = g.adjacency.toarray() if g.n <= CONFIG.dense_limit else None
        by_size: Dict[int, List[int]] = {}
        for k in small:
            by_size.setdefault(len(classes[k]), []).append(k)
        for group in by_size.values():
            idx = np.vstack([classes[k] for k in group])
            if dense is not None:
                stack = dense[idx[:, :, None], idx[:, None, :]]
            else:
                stack = np.stack([g.adjacency[m][:, m].toarray() for m in idx])
            rows[group] = batch_copy_densities(stack, settings.configs)
    for k in sorted(set(range(len(classes))) - set(small)):
        rows[k] = density_vector(induced_subgraph(g, classes[k]), settings.configs, settings.mode)
    return rows


def partition_mean_vector(
    g, settings: PcanSettings, K: int, tau: int, seed
) -> Tuple[np.ndarray, PartitionPlan]:
    """Average density vector over the K induced subgraphs of one random partition."""
    plan = draw_plan(g.n, K, tau, seed)
    return _class_densities(g, plan, settings).mean(axis=0), plan


def mean_density_matrix(
    sample: NetworkSample, settings: PcanSettings, K: int, tau: int
) -> Tuple[np.ndarray, List[PartitionPlan]]:
    """Raw p x N matrix of partition-averaged densities plus the partitions used."""
    results = ordered_map(
        lambda i: partition_mean_vector(
            sample.graphs[i], settings, K, tau, sub_seed(settings.seed, i)
        ),
        list(range(len(sample))),
        settings.threads,
    )
    plans = [plan for _, plan in results]
    constructive = sum(1 for plan in plans if plan.method == "constructive")
    if constructive:
        logger.warning(
            f"{constructive} of {len(plans)} partitions used the constructive scheme "
            f"(K={K}, tau={tau}): rejection sampling kept failing"
        )
    return np.column_stack([vec for vec, _ in results]), plans


def spcan(
    sample: NetworkSample, settings: PcanSettings
) -> Tuple[DensityMatrix, PcaResult, List[PartitionPlan]]:
    """
    Sampling-based PCA: every graph is split into K random classes of at least
    tau vertices, densities are averaged over the induced class subgraphs,
    and PCA runs on the resulting mean-density matrix.

    Graph i draws its partition from sub_seed(settings.seed, i).
    """
    _check_sample(sample, settings.configs)
    tau, K = resolve_tau_k(sample, settings)
    logger.info(f"sPCAN: {len(sample)} graphs, K={K}, tau={tau}, seed={settings.seed}")
    raw, plans = mean_density_matrix(sample, settings, K, tau)
    d = standardize_rows(
        raw,
        unit_sd=settings.unit_sd,
        row_names=[c.name for c in settings.configs],
        col_ids=sample.ids,
    )
    return d, pca(d, settings.r), plans
