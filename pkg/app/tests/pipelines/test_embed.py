import logging
from unittest.mock import patch

import networkx as nx
import numpy as np
import pytest

from app.census.configs import default_configuration_set, parse_config_list
from app.census.counting import density_vector
from app.graphs.graph import Graph, NetworkSample, complete_graph, induced_subgraph
from app.pipelines.embed import (
    PcanSettings,
    partition_mean_vector,
    pcan,
    resolve_tau_k,
    spcan,
    tau_k_for_size,
)
from app.services.errors import (
    ConfigurationSizeError,
    DegenerateDataError,
    InfeasiblePartitionError,
)


def _er(n, q, seed):
    return Graph(n, nx.gnp_random_graph(n, q, seed=seed).edges())


def _sample(graphs):
    return NetworkSample.from_graphs(graphs)


@pytest.fixture
def two_groups():
    sparse = [_er(40, 0.2, seed) for seed in range(10)]
    dense = [_er(40, 0.5, 100 + seed) for seed in range(10)]
    return _sample(sparse + dense)


# ----- tau / K defaults -----
@pytest.mark.parametrize("n_min, expected", [(264, (12, 22)), (60, (12, 5)), (12, (12, 1))])
def test_default_tau_k(n_min, expected):
    assert tau_k_for_size(n_min, default_configuration_set()) == expected


def test_default_tau_k_infeasible():
    with pytest.raises(InfeasiblePartitionError, match="tau <= n_min/K"):
        tau_k_for_size(11, default_configuration_set())


def test_default_tau_k_with_small_configs():
    assert tau_k_for_size(11, parse_config_list("star1,triangle")) == (6, 1)


def test_resolve_tau_k_fills_missing_value(two_groups):
    assert resolve_tau_k(two_groups, PcanSettings(K=2)) == (12, 2)
    assert resolve_tau_k(two_groups, PcanSettings(tau=13)) == (13, 3)
    assert resolve_tau_k(two_groups, PcanSettings()) == (12, 3)


@pytest.mark.parametrize("K, tau", [(None, 5), (4, 12), (1, 41)])
def test_resolve_tau_k_rejects_bound_violations(two_groups, K, tau):
    with pytest.raises(InfeasiblePartitionError, match="2\\*max\\|F_j\\| <= tau <= n_min/K"):
        resolve_tau_k(two_groups, PcanSettings(K=K, tau=tau))


def test_settings_validation():
    with pytest.raises(ValueError):
        PcanSettings(configs=[])
    with pytest.raises(ValueError):
        PcanSettings(K=0)
    assert PcanSettings(mode="induced").mode.value == "induced"


# ----- pcan -----
def test_pcan_separates_sparse_and_dense_graphs(two_groups):
    d, result = pcan(two_groups, PcanSettings())
    first = result.scores[:, 0]
    assert np.all(np.sign(first[:10]) == np.sign(first[0]))
    assert np.all(np.sign(first[10:]) == -np.sign(first[0]))
    assert result.variance_explained[0] > 0.8


def test_pcan_drops_constant_isolate_row(two_groups):
    d, result = pcan(two_groups, PcanSettings(r="all"))
    assert d.dropped_rows == [("isolate", "zero variance")]
    assert result.eigenvalues.shape == (8,)
    assert result.r == 8
    assert result.variance_explained.sum() == pytest.approx(1.0)
    assert result.col_ids == two_groups.ids


def test_pcan_keeps_sample_order(two_groups):
    d, _ = pcan(two_groups, PcanSettings())
    expected = density_vector(two_groups.graphs[3], default_configuration_set())
    np.testing.assert_array_equal(d.raw[:, 3], expected)


def test_pcan_identical_graphs_is_degenerate():
    g = _er(20, 0.3, 1)
    with pytest.raises(DegenerateDataError, match="nothing to analyze"):
        pcan(_sample([g, Graph(20, g.edges())]), PcanSettings())


def test_pcan_needs_two_graphs():
    with pytest.raises(ValueError, match="at least 2"):
        pcan(_sample([_er(20, 0.3, 1)]), PcanSettings())


def test_pcan_names_graph_too_small_for_config():
    sample = _sample([_er(20, 0.3, 1), complete_graph(4, label="tiny")])
    with pytest.raises(ConfigurationSizeError, match="tiny"):
        pcan(sample, PcanSettings())


# ----- spcan -----
def test_single_class_spcan_equals_pcan():
    rng = np.random.default_rng(8)
    for trial in range(20):
        graphs = [
            _er(int(rng.integers(15, 26)), float(rng.uniform(0.1, 0.6)), 50 * trial + i)
            for i in range(6)
        ]
        sample = _sample(graphs)
        d_full, full = pcan(sample, PcanSettings())
        d_sub, sub, plans = spcan(sample, PcanSettings(K=1, tau=12, seed=trial))
        assert np.array_equal(d_full.raw, d_sub.raw)
        assert np.array_equal(full.eigenvalues, sub.eigenvalues)
        assert np.array_equal(full.loadings, sub.loadings)
        assert np.array_equal(full.scores, sub.scores)
        assert all(plan.K == 1 for plan in plans)


def test_spcan_is_deterministic(two_groups):
    settings = PcanSettings(seed=17)
    first = spcan(two_groups, settings)
    second = spcan(two_groups, settings)
    assert np.array_equal(first[0].raw, second[0].raw)
    assert np.array_equal(first[1].scores, second[1].scores)
    assert [p.assignment for p in first[2]] == [p.assignment for p in second[2]]


def test_spcan_seed_changes_partitions(two_groups):
    _, _, a = spcan(two_groups, PcanSettings(seed=1))
    _, _, b = spcan(two_groups, PcanSettings(seed=2))
    assert [p.assignment for p in a] != [p.assignment for p in b]


def test_spcan_columns_are_partition_means(two_groups):
    configs = default_configuration_set()
    d, _, plans = spcan(two_groups, PcanSettings(seed=4))
    for i in (0, 7, 15):
        plan = plans[i]
        assert plan.K == 3 and min(plan.class_sizes()) >= 12
        vectors = [
            density_vector(induced_subgraph(two_groups.graphs[i], members), configs)
            for members in plan.classes()
        ]
        np.testing.assert_allclose(d.raw[:, i], np.mean(vectors, axis=0), rtol=1e-15)


def test_spcan_separates_groups(two_groups):
    _, result, _ = spcan(two_groups, PcanSettings(seed=5))
    first = result.scores[:, 0]
    assert np.all(np.sign(first[:10]) == np.sign(first[0]))
    assert np.all(np.sign(first[10:]) == -np.sign(first[0]))


def test_spcan_reports_infeasible_partition():
    sample = _sample([_er(11, 0.3, 1), _er(20, 0.3, 2)])
    with pytest.raises(InfeasiblePartitionError):
        spcan(sample, PcanSettings(configs=parse_config_list("star1,star5")))


def _class_vectors(g, plan, configs, mode="copies"):
    return np.vstack(
        [density_vector(induced_subgraph(g, members), configs, mode) for members in plan.classes()]
    )


@pytest.mark.parametrize("n, K", [(40, 3), (100, 2), (100, 6), (150, 2)])
def test_partition_mean_vector_matches_per_class_densities(n, K):
    g = _er(n, 0.15, n + K)
    settings = PcanSettings()
    vector, plan = partition_mean_vector(g, settings, K, 12, seed=K)
    expected = _class_vectors(g, plan, settings.configs).mean(axis=0)
    np.testing.assert_allclose(vector, expected, rtol=1e-15)


def test_partition_mean_vector_sparse_graph_path():
    g = _er(90, 0.2, 6)
    settings = PcanSettings()
    with patch("app.pipelines.embed.CONFIG") as config:
        config.dense_limit = 10
        vector, plan = partition_mean_vector(g, settings, 4, 12, seed=2)
    expected = _class_vectors(g, plan, settings.configs).mean(axis=0)
    np.testing.assert_allclose(vector, expected, rtol=1e-15)


def test_partition_mean_vector_induced_mode():
    g = _er(60, 0.3, 8)
    settings = PcanSettings(mode="induced")
    vector, plan = partition_mean_vector(g, settings, 3, 12, seed=9)
    expected = _class_vectors(g, plan, settings.configs, "induced").mean(axis=0)
    np.testing.assert_allclose(vector, expected, rtol=1e-15)


def test_constructive_partitions_logged_once_per_sample(two_groups, caplog):
    caplog.set_level(logging.INFO)
    with patch("app.graphs.partition.CONFIG") as config:
        config.partition_attempts = 0
        _, _, plans = spcan(two_groups, PcanSettings(seed=1))
    assert all(plan.method == "constructive" for plan in plans)
    notes = [r for r in caplog.records if "constructive" in r.getMessage()]
    assert len(notes) == 1
    assert notes[0].levelno == logging.WARNING
    assert "20 of 20" in notes[0].getMessage()


def test_pcan_scores_of_two_models_do_not_overlap():
    graphs = [_er(50, 0.2, seed) for seed in range(20)] + [_er(50, 0.5, 500 + seed) for seed in range(20)]
    _, result = pcan(_sample(graphs), PcanSettings(r=2))
    first = result.scores[:, 0]
    low, high = sorted((first[:20], first[20:]), key=lambda s: s.min())
    assert low.max() < high.min()
    assert result.scores.shape == (40, 2)


def test_pcan_induced_sparse_sample_keeps_every_configuration():
    graphs = [_er(30, 0.1, 900 + seed) for seed in range(20)]
    d, result = pcan(_sample(graphs), PcanSettings(mode="induced"))
    assert d.dropped_rows == []
    assert result.eigenvalues.shape == (9,)
    assert result.variance_explained.sum() == pytest.approx(1.0)


@pytest.mark.slow
def test_spcan_leading_loading_agrees_with_pcan():
    from app.krg.kernels import ConstantKernel
    from app.krg.sampler import sample_network

    sample = sample_network(60, 300, ConstantKernel(0.1), seed=21)
    _, full = pcan(sample, PcanSettings())
    kept = [c for c in default_configuration_set() if c.name in full.row_names]
    _, sub, _ = spcan(sample, PcanSettings(configs=kept, K=25, tau=12, seed=3))
    assert full.row_names == sub.row_names
    cosine = abs(float(np.dot(full.loading(1), sub.loading(1))))
    assert cosine >= 0.95
