"""
Kernel moments: the expected product of f over a configuration's edges when
every configuration vertex gets an independent U(0, 1) latent.

Edges that share a vertex are dependent through that vertex's latent, so the
expectation is taken over the full |V_F|-dimensional latent vector. Finite
sums of this shape (block kernels over block labels, quadrature over
Gauss-Legendre nodes) are tensor contractions and go through numpy.einsum.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from app.census.configs import SubgraphConfig
from app.krg.kernels import BlockKernel, ConstantKernel, Kernel, ProductKernel
from app.services.utils import chunked, make_rng

logger = logging.getLogger(__name__)

METHODS = ("closed_form", "quadrature", "monte_carlo")
QUADRATURE_ORDER = 32
QUADRATURE_MAX_VERTICES = 4
MONTE_CARLO_DRAWS = 1_000_000
MONTE_CARLO_CHUNK = 100_000


@dataclass
class KernelMoment:
    """mu_F(f) with how it was obtained and an error bound or standard error."""

    config: SubgraphConfig
    value: float
    method: str
    error_estimate: float

    def to_dict(self) -> dict:
        return {
            "config": self.config.name,
            "value": self.value,
            "method": self.method,
            "error_estimate": self.error_estimate,
        }


def _einsum_subscripts(config: SubgraphConfig) -> str:
    letters = "abcdefghij"
    vertices = [letters[v] for v in range(config.node_count)]
    edges = [letters[u] + letters[v] for u, v in config.pattern_edges]
    return ",".join(vertices + edges) + "->"


def contract(config: SubgraphConfig, weights: np.ndarray, table: np.ndarray) -> float:
    """
    sum over label assignments (l_v) of prod_v weights[l_v] * prod_(u,v) table[l_u, l_v].

    With block weights and the block matrix this is the block-model moment;
    with quadrature weights and f on the nodes it is the quadrature rule.
    """
    operands = [weights] * config.node_count + [table] * config.edge_count
    return float(np.einsum(_einsum_subscripts(config), *operands, optimize=True))


def _closed_form(kernel: Kernel, config: SubgraphConfig) -> KernelMoment:
    if isinstance(kernel, ConstantKernel):
        value = kernel.q**config.edge_count
    elif isinstance(kernel, BlockKernel):
        value = contract(config, kernel.weights, kernel.B)
    elif isinstance(kernel, ProductKernel):
        # f factorizes, so mu_F = prod_v E[g(X)^deg_F(v)]
        degrees = np.bincount(np.ravel(config.pattern_edges), minlength=config.node_count)
        value = math.prod(kernel.power_mean(int(d)) for d in degrees)
    else:
        raise ValueError(f"no closed form for {kernel.kind} kernels; use quadrature or monte_carlo")
    return KernelMoment(config, float(value), "closed_form", 0.0)


def _gauss_legendre(order: int):
    nodes, weights = leggauss(order)
    return (nodes + 1.0) / 2.0, weights / 2.0


def _quadrature(kernel: Kernel, config: SubgraphConfig, order: int) -> KernelMoment:
    if order < 2:
        raise ValueError(f"quadrature order must be at least 2, got {order}")
    nodes, weights = _gauss_legendre(order)
    value = contract(config, weights, kernel.matrix(nodes))
    coarse_nodes, coarse_weights = _gauss_legendre(max(order // 2, 1))
    coarse = contract(config, coarse_weights, kernel.matrix(coarse_nodes))
    return KernelMoment(config, value, "quadrature", abs(value - coarse))


def _monte_carlo(kernel: Kernel, config: SubgraphConfig, draws: int, seed) -> KernelMoment:
    if draws < 2:
        raise ValueError(f"monte_carlo needs at least 2 draws, got {draws}")
    rng = make_rng(seed)
    total = 0.0
    total_sq = 0.0
    for block in chunked(draws, MONTE_CARLO_CHUNK):
        x = rng.random((len(block), config.node_count))
        product = np.ones(len(block))
        for u, v in config.pattern_edges:
            product *= kernel.evaluate(x[:, u], x[:, v])
        total += float(product.sum())
        total_sq += float(np.dot(product, product))
    mean = total / draws
    variance = max(total_sq / draws - mean * mean, 0.0) * draws / (draws - 1)
    return KernelMoment(config, mean, "monte_carlo", math.sqrt(variance / draws))


def resolve_method(kernel: Kernel, config: SubgraphConfig, method: str = "auto") -> str:
    if method != "auto":
        if method not in METHODS:
            raise ValueError(f"unknown moment method {method!r}; use auto or one of {', '.join(METHODS)}")
        return method
    if kernel.has_closed_form:
        return "closed_form"
    if config.node_count <= QUADRATURE_MAX_VERTICES:
        return "quadrature"
    return "monte_carlo"


def kernel_moment(
    kernel: Kernel,
    config: SubgraphConfig,
    method: str = "auto",
    budget: Optional[int] = None,
    seed=0,
) -> KernelMoment:
    """
    mu_F(f) = E[prod over F's edges of f(x_u, x_v)], x i.i.d. U(0, 1).

    Args:
        method: "auto", "closed_form", "quadrature" or "monte_carlo"
        budget: per-axis quadrature order (default 32) or Monte Carlo draws (default 10**6)
        seed: Monte Carlo stream

    Raises:
        ValueError: edgeless configuration, unknown method, or closed form
            requested for a kernel without one
    """
    if not config.has_edges:
        raise ValueError("edgeless configuration has no kernel moment")
    chosen = resolve_method(kernel, config, method)
    if chosen == "closed_form":
        moment = _closed_form(kernel, config)
    elif chosen == "quadrature":
        moment = _quadrature(kernel, config, budget or QUADRATURE_ORDER)
    else:
        moment = _monte_carlo(kernel, config, budget or MONTE_CARLO_DRAWS, seed)
    moment.value = min(max(moment.value, 0.0), 1.0)
    logger.debug(
        f"mu[{config.name}] of {kernel.spec()} = {moment.value:.6g} "
        f"({moment.method}, +/- {moment.error_estimate:.2e})"
    )
    return moment
