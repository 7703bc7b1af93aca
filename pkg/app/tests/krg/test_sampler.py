import numpy as np
import pytest

from app.krg.kernels import ConstantKernel, parse_kernel
from app.krg.sampler import sample_cells, sample_graph, sample_network


def test_zero_kernel_gives_empty_graph():
    g = sample_graph(50, ConstantKernel(0.0), seed=1)
    assert g.n == 50
    assert g.edge_count == 0


def test_one_kernel_gives_complete_graph():
    g = sample_graph(5, ConstantKernel(1.0), seed=1)
    assert g.edge_count == 10


def test_single_vertex_graph():
    g = sample_graph(1, ConstantKernel(1.0), seed=0)
    assert g.n == 1 and g.edge_count == 0


def test_rejects_empty_graph():
    with pytest.raises(ValueError):
        sample_graph(0, ConstantKernel(0.5), seed=0)


def test_latents_are_kept():
    g = sample_graph(30, ConstantKernel(0.5), seed=2)
    assert g.latents.shape == (30,)
    assert np.all((g.latents >= 0) & (g.latents < 1))


def test_sampling_is_deterministic():
    kernel = parse_kernel("logistic:0.3,0.1")
    assert sample_graph(300, kernel, seed=9) == sample_graph(300, kernel, seed=9)
    assert sample_graph(300, kernel, seed=9) != sample_graph(300, kernel, seed=10)


def test_mean_edge_count_matches_constant_kernel():
    sample = sample_network(200, 50, ConstantKernel(0.3), seed=4)
    edges = np.array([g.edge_count for g in sample.graphs], dtype=float)
    expected = 0.3 * 50 * 49 / 2
    se = edges.std(ddof=1) / np.sqrt(edges.size)
    assert abs(edges.mean() - expected) <= 4 * se


def test_block_kernel_without_cross_edges():
    kernel = parse_kernel("block:1.0,0.0,0.0,1.0")
    g = sample_graph(40, kernel, seed=6)
    blocks = kernel.block_of(g.latents)
    assert g.edge_count > 0
    assert all(blocks[u] == blocks[v] for u, v in g.edges())
    sizes = np.bincount(blocks, minlength=2)
    assert g.edge_count == sum(s * (s - 1) // 2 for s in sizes)


def test_sample_network_ids_and_meta():
    sample = sample_network(5, 12, ConstantKernel(0.2), seed=3)
    assert sample.ids == ["g001", "g002", "g003", "g004", "g005"]
    assert [g.label for g in sample.graphs] == sample.ids
    assert sample.meta == {"kernel": "constant:0.2", "seed": 3}


def test_sample_network_threads_do_not_change_result():
    kernel = parse_kernel("product:0.1,0.8")
    serial = sample_network(6, 40, kernel, seed=12, threads=1)
    pooled = sample_network(6, 40, kernel, seed=12, threads=4)
    assert all(a == b for a, b in zip(serial.graphs, pooled.graphs))


# ----- cells -----
def test_sample_cells_are_simple_graphs():
    cells = sample_cells(7, 9, parse_kernel("block:0.8,0.1,0.1,0.8"), np.random.default_rng(0))
    assert cells.shape == (7, 9, 9)
    assert cells.dtype == np.int8
    assert np.array_equal(cells, np.swapaxes(cells, 1, 2))
    assert not np.any(np.diagonal(cells, axis1=1, axis2=2))


def test_sample_cells_extremes():
    rng = np.random.default_rng(1)
    full = sample_cells(3, 4, ConstantKernel(1.0), rng)
    assert full.sum() == 3 * 4 * 3
    assert not sample_cells(3, 4, ConstantKernel(0.0), rng).any()


def test_sample_cells_edge_rate():
    cells = sample_cells(2000, 6, ConstantKernel(0.4), np.random.default_rng(5))
    rate = cells.sum() / (2000 * 6 * 5)
    assert abs(rate - 0.4) < 0.01


def test_pair_edge_frequency_matches_star1_moment():
    from app.census.configs import star
    from app.krg.moments import kernel_moment

    kernel = parse_kernel("block:0.8,0.1,0.1,0.8")
    hits = np.array([sample_graph(2, kernel, seed=s).edge_count for s in range(2000)], dtype=float)
    mu = kernel_moment(kernel, star(1)).value
    se = np.sqrt(mu * (1 - mu) / hits.size)
    assert abs(hits.mean() - mu) <= 4 * se
