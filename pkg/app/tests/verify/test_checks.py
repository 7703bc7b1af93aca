import dataclasses

import numpy as np
import pytest

from app.census.configs import isolate, star, triangle
from app.krg.kernels import ConstantKernel, parse_kernel
from app.verify.checks import (
    CHECK_NAMES,
    CheckReport,
    SampleSpec,
    check_clt_eigen,
    check_clt_partition_mean,
    check_mean_density,
    check_subsample_mean,
    compare_pcan_spcan,
    run_named_check,
)

BLOCK = parse_kernel("block:0.8,0.1,0.1,0.8")


# ----- mean_density -----
def test_mean_density_on_complete_graphs():
    report = check_mean_density(ConstantKernel(1.0), triangle(), n=10, N=5, seed=1)
    assert report.statistic["mean"] == 1.0
    assert report.statistic["se"] == 0.0
    assert report.reference["mu"] == 1.0
    assert report.passed
    assert report.status == "pass"


def test_mean_star1_density_of_complete_graphs_is_one():
    report = check_mean_density(ConstantKernel(1.0), star(1), n=10, N=3, seed=2)
    assert report.statistic["mean"] == 1.0
    assert report.passed


def test_mean_density_rejects_edgeless_and_oversized_configs():
    with pytest.raises(ValueError, match="edgeless"):
        check_mean_density(ConstantKernel(0.5), isolate(), n=10, N=5)
    with pytest.raises(ValueError, match="needs 4 vertices"):
        check_mean_density(ConstantKernel(0.5), star(3), n=3, N=5)


def test_mean_density_is_reproducible():
    first = check_mean_density(BLOCK, star(2), n=20, N=10, seed=7)
    second = check_mean_density(BLOCK, star(2), n=20, N=10, seed=7)
    assert first.statistic == second.statistic


def test_mean_density_threads_do_not_change_result():
    serial = check_mean_density(BLOCK, star(1), n=20, N=12, seed=2, threads=1)
    pooled = check_mean_density(BLOCK, star(1), n=20, N=12, seed=2, threads=4)
    assert serial.statistic == pooled.statistic


# ----- subsample_mean -----
def test_single_class_subsample_matches_full_graph():
    report = check_subsample_mean(BLOCK, star(1), n=30, K=1, tau=30, reps=10, seed=3)
    assert report.statistic["difference"] == 0.0
    assert report.statistic["max_abs_replicate_difference"] == 0.0
    assert report.z_or_ratio == 0.0


def test_subsample_mean_checks_feasibility():
    with pytest.raises(ValueError):
        check_subsample_mean(BLOCK, star(1), n=30, K=4, tau=10, reps=5)


# ----- clt_partition_mean -----
def test_clt_partition_mean_skips_zero_variance():
    report = check_clt_partition_mean(ConstantKernel(1.0), star(1), 6, (2, 8), reps=20, seed=0)
    assert report.skipped
    assert report.status == "skipped"
    assert report.note == "degenerate (zero variance), skipped"
    assert report.ok and not report.passed


def test_clt_partition_mean_without_shape_test():
    report = check_clt_partition_mean(ConstantKernel(0.3), star(1), 8, (4, 16), reps=100, seed=1)
    assert len(report.statistic["scaling_ratios"]) == 1
    assert report.statistic["skewness"] is None
    assert "shape test needs reps >= 2000" in report.note
    assert report.replicates["K_list"] == [4, 16]


def test_clt_partition_mean_argument_checks():
    with pytest.raises(ValueError, match="two positive K"):
        check_clt_partition_mean(ConstantKernel(0.3), star(1), 8, (4,), reps=10)
    with pytest.raises(ValueError, match="cannot hold"):
        check_clt_partition_mean(ConstantKernel(0.3), star(5), 4, (2, 4), reps=10)


# ----- clt_eigen -----
def test_clt_eigen_skips_constant_kernel():
    report = check_clt_eigen(
        ConstantKernel(0.3), [star(1), triangle()], n=24, K=2, tau=12, N_list=(10, 20), reps=5
    )
    assert report.skipped
    assert report.note == "assumption gamma_1 > gamma_2 violated, skipped"


def test_clt_eigen_requires_equal_cells():
    with pytest.raises(ValueError, match="equal-size cells"):
        check_clt_eigen(BLOCK, [star(1), triangle()], n=30, K=2, tau=12, N_list=(10, 20), reps=5)


def test_clt_eigen_statistics_shape():
    report = check_clt_eigen(
        BLOCK, [star(1), star(2), triangle()], n=48, K=4, tau=12, N_list=(20, 40), reps=15, seed=4
    )
    if not report.skipped:
        assert len(report.statistic["scaled_variances"]) == 2
        assert report.reference["two_gamma_squared"] > 0
        assert report.z_or_ratio == pytest.approx(
            report.statistic["scaled_variances"][-1] / report.reference["two_gamma_squared"]
        )


# ----- compare_pcan_spcan -----
def test_compare_with_single_class_agrees_exactly():
    spec = SampleSpec(BLOCK, N=8, n=30, seed=5)
    report = compare_pcan_spcan(spec, K=1, tau=12, reps=1, seed=0)
    assert report.statistic["cosines_pc1"] == [1.0]
    assert report.statistic["pcan_inside_spcan_range"] == [True] * len(
        report.statistic["pcan_variance_explained"]
    )
    assert report.reference["speed_applies"] is False
    assert report.passed


def test_compare_accepts_drawn_sample():
    sample = SampleSpec(BLOCK, N=10, n=40, seed=6).draw()
    report = compare_pcan_spcan(sample, K=3, tau=12, reps=3, seed=1)
    assert len(report.statistic["cosines_pc1"]) == 3
    assert report.replicates == {"reps": 3, "N": 10, "n_min": 40, "K": 3, "tau": 12}


def test_compare_runs_spcan_on_rows_pcan_kept():
    sample = SampleSpec(ConstantKernel(0.3), N=12, n=60, seed=3).draw()
    report = compare_pcan_spcan(sample, K=4, tau=12, reps=3, seed=2)
    assert "isolate" not in report.details["compared_rows"]
    assert report.statistic["runs_with_other_rows"] == 0
    assert len(report.statistic["pcan_variance_explained"]) == len(report.details["compared_rows"])


# ----- verdicts -----
def _report():
    return CheckReport(
        name="mean_density",
        statistic={"mean": 0.5, "se": 0.01},
        reference={"mu": 0.5, "mu_error": 0.0},
        z_or_ratio=0.0,
        tolerance={"z": 4.0},
        replicates={"N": 10},
        seed=0,
    )


def test_verdict_is_recomputed_from_stored_values():
    report = _report()
    assert report.passed
    far = dataclasses.replace(report, statistic={"mean": 0.6, "se": 0.01})
    assert not far.passed
    assert far.status == "fail"
    assert not far.ok


def test_report_to_dict_carries_verdict():
    payload = _report().to_dict()
    assert payload["status"] == "pass"
    assert payload["pass"] is True
    assert payload["tolerance"] == {"z": 4.0}


def test_run_named_check_rejects_unknown_name():
    with pytest.raises(KeyError):
        run_named_check("bogus")


def test_check_names():
    assert CHECK_NAMES == (
        "mean_density",
        "subsample_mean",
        "clt_partition_mean",
        "clt_eigen",
        "compare_pcan_spcan",
    )


# ----- acceptance (slow) -----
@pytest.mark.slow
@pytest.mark.parametrize("name", CHECK_NAMES)
def test_named_checks_pass_at_fast_budget(name):
    report = run_named_check(name, seed=0, fast=True)
    assert report.ok, report.to_dict()


@pytest.mark.slow
def test_block_kernel_mean_density_for_every_config():
    from app.census.configs import default_configuration_set

    for config in default_configuration_set():
        if config.has_edges:
            report = check_mean_density(BLOCK, config, n=30, N=300, seed=11)
            assert report.passed, report.to_dict()


@pytest.mark.slow
def test_constant_kernel_mean_edge_density():
    report = check_mean_density(ConstantKernel(0.3), star(1), n=40, N=500, seed=4)
    assert report.passed, report.to_dict()
    assert abs(report.statistic["mean"] - 0.3) <= 4 * report.statistic["se"]


@pytest.mark.slow
def test_clt_eigen_at_full_budget():
    report = run_named_check("clt_eigen", seed=0, fast=False)
    assert report.replicates["reps"] == 300
    assert report.replicates["N_list"] == [100, 400]
    assert report.passed, report.to_dict()


@pytest.mark.slow
def test_partition_mean_variance_scales_inversely_with_k():
    report = check_clt_partition_mean(ConstantKernel(0.3), star(1), 20, (25, 100), reps=2000, seed=2)
    assert report.passed, report.to_dict()
    ratio = report.statistic["variances"][0] / report.statistic["variances"][1]
    assert 3.0 <= ratio <= 5.3
    assert np.isfinite(report.statistic["skewness"])


@pytest.mark.slow
def test_block_kernel_subsample_mean_for_triangles():
    report = check_subsample_mean(BLOCK, triangle(), n=120, K=5, tau=12, reps=300, seed=8)
    assert report.passed, report.to_dict()


@pytest.mark.slow
def test_logistic_kernel_partition_mean_scaling():
    kernel = parse_kernel("logistic:0.3,0.1")
    report = check_clt_partition_mean(kernel, triangle(), 20, (25, 100), reps=2000, seed=5)
    low, high = report.tolerance["scaling_band"]
    assert all(low <= r <= high for r in report.statistic["scaling_ratios"])


@pytest.mark.slow
def test_spcan_is_faster_on_large_graphs():
    from app.krg.sampler import sample_network

    sample = sample_network(10, 800, ConstantKernel(0.05), seed=13)
    report = compare_pcan_spcan(sample, K=66, tau=12, reps=3, seed=0)
    assert report.reference["speed_applies"]
    assert report.statistic["speed_ratio"] >= 2.0


@pytest.mark.slow
def test_spcan_variance_explained_brackets_pcan():
    report = run_named_check("compare_pcan_spcan", seed=0, fast=False)
    assert report.statistic["median_abs_cosine_pc1"] >= 0.9
    assert report.statistic["pcan_inside_spcan_range"][:2] == [True, True]
