"""
Monte Carlo checks of the density/PCA theory on kernel-based random graphs.

Each check returns a CheckReport whose verdict is recomputed from the stored
statistic, reference and tolerance by the criterion registered for the
check's name. Mean checks use 4-standard-error bands; variance and CLT
checks use factor-2 bands (factor 4/3 for the 1/K variance scaling).

Replicate r of a check draws from SeedSequence([seed, ..., r]), and
replicates are gathered in order, so every report is a function of its seed.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy import stats

from app.analysis.pca import pca, standardize_rows
from app.census.configs import SubgraphConfig, default_configuration_set, star, triangle
from app.census.counting import batch_copy_densities, density
from app.graphs.graph import NetworkSample
from app.graphs.partition import check_feasible, partition
from app.krg.kernels import ConstantKernel, Kernel, parse_kernel
from app.krg.moments import kernel_moment
from app.krg.sampler import sample_cells, sample_graph, sample_network
from app.pipelines.embed import PcanSettings, pcan, spcan
from app.services.errors import DegenerateDataError
from app.services.utils import ordered_map, timed

logger = logging.getLogger(__name__)

MEAN_Z = 4.0
VARIANCE_FACTOR = 2.0
SCALING_BAND = (0.75, 4.0 / 3.0)
MAX_SKEW = 0.25
MAX_EXCESS_KURTOSIS = 0.5
SHAPE_MIN_REPS = 2000
MIN_COSINE = 0.9
SPEED_MIN_N = 500

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"


@dataclass
class CheckReport:
    name: str
    statistic: Dict[str, Any]
    reference: Dict[str, Any]
    z_or_ratio: float
    tolerance: Dict[str, Any]
    replicates: Dict[str, Any]
    seed: int
    runtime: float = 0.0
    note: str = ""
    skipped: bool = False
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.skipped:
            return False
        return bool(CRITERIA[self.name](self.statistic, self.reference, self.tolerance))

    @property
    def status(self) -> str:
        if self.skipped:
            return SKIPPED
        return PASS if self.passed else FAIL

    @property
    def ok(self) -> bool:
        """Passed, or skipped with a stated reason."""
        return self.status != FAIL

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["status"] = self.status
        payload["pass"] = self.passed
        return payload


def _within_band(value: float, center: float, z: float, se: float) -> bool:
    return abs(value - center) <= z * se


def _ratio_ok(ratio: float, factor: float) -> bool:
    return 1.0 / factor <= ratio <= factor


def _mean_density_criterion(s, r, t) -> bool:
    return _within_band(s["mean"], r["mu"], t["z"], s["se"] + r["mu_error"])


def _subsample_criterion(s, r, t) -> bool:
    combined = math.hypot(s["se_full"], s["se_partition"])
    return (
        _within_band(s["mean_partition"], s["mean_full"], t["z"], combined)
        and _within_band(s["mean_full"], r["mu"], t["z"], s["se_full"] + r["mu_error"])
        and _within_band(s["mean_partition"], r["mu"], t["z"], s["se_partition"] + r["mu_error"])
    )


def _clt_partition_criterion(s, r, t) -> bool:
    low, high = t["scaling_band"]
    scaling = all(low <= ratio <= high for ratio in s["scaling_ratios"])
    shape = s.get("skewness") is None or (
        abs(s["skewness"]) <= t["max_skewness"]
        and abs(s["excess_kurtosis"]) <= t["max_excess_kurtosis"]
    )
    return scaling and shape


def _clt_eigen_criterion(s, r, t) -> bool:
    variances = s["scaled_variances"]
    stable = max(variances) <= t["factor"] * min(variances)
    matches = _ratio_ok(variances[-1] / r["two_gamma_squared"], t["factor"])
    products = s["n_times_vector_error"]
    vector = max(products) <= t["factor"] * min(products)
    return stable and matches and vector


def _compare_criterion(s, r, t) -> bool:
    agree = s["median_abs_cosine_pc1"] >= t["min_cosine"]
    fast = not r["speed_applies"] or s["speed_ratio"] > t["min_speed_ratio"]
    return agree and fast


CRITERIA: Dict[str, Callable[[dict, dict, dict], bool]] = {
    "mean_density": _mean_density_criterion,
    "subsample_mean": _subsample_criterion,
    "clt_partition_mean": _clt_partition_criterion,
    "clt_eigen": _clt_eigen_criterion,
    "compare_pcan_spcan": _compare_criterion,
}


def _replicate_seed(seed: int, *path: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), *[int(p) for p in path]])


def _mean_and_se(values: np.ndarray):
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1)) / math.sqrt(values.size)


def _require_edges(config: SubgraphConfig) -> None:
    if not config.has_edges:
        raise ValueError("edgeless configuration has no kernel moment")


def _finish(report: CheckReport) -> CheckReport:
    log = logger.warning if report.status == FAIL else logger.info
    suffix = f" ({report.note})" if report.note else ""
    log(f"check {report.name}: {report.status}{suffix}")
    return report


def check_mean_density(
    kernel: Kernel, config: SubgraphConfig, n: int, N: int, seed: int = 0, threads: Optional[int] = None
) -> CheckReport:
    """Mean copy density over N sampled graphs against the kernel moment."""
    _require_edges(config)
    if config.node_count > n:
        raise ValueError(f"configuration {config.name} needs {config.node_count} vertices, n = {n}")

    @timed("check_mean_density")
    def run():
        values = ordered_map(
            lambda i: density(sample_graph(n, kernel, _replicate_seed(seed, i)), config),
            list(range(N)),
            threads,
        )
        return np.array(values), kernel_moment(kernel, config, seed=seed)

    (values, moment), elapsed = run()
    mean, se = _mean_and_se(values)
    spread = se + moment.error_estimate
    return _finish(
        CheckReport(
            name="mean_density",
            statistic={"mean": mean, "se": se, "sd": float(values.std(ddof=1)) if N > 1 else 0.0},
            reference={"mu": moment.value, "mu_error": moment.error_estimate, "method": moment.method},
            z_or_ratio=abs(mean - moment.value) / spread if spread > 0 else 0.0,
            tolerance={"z": MEAN_Z},
            replicates={"N": N, "n": n},
            seed=seed,
            runtime=elapsed,
            details={"kernel": kernel.spec(), "config": config.name},
        )
    )


def check_subsample_mean(
    kernel: Kernel,
    config: SubgraphConfig,
    n: int,
    K: int,
    tau: int,
    reps: int,
    seed: int = 0,
    threads: Optional[int] = None,
) -> CheckReport:
    """Full-graph density and partition-averaged density estimate the same moment."""
    _require_edges(config)
    check_feasible(n, K, tau)

    def replicate(rep: int):
        graph_seed, partition_seed = _replicate_seed(seed, rep).spawn(2)
        g = sample_graph(n, kernel, graph_seed)
        _, parts = partition(g, K, tau, partition_seed)
        averaged = np.mean([density(part, config) for part in parts])
        return density(g, config), float(averaged)

    @timed("check_subsample_mean")
    def run():
        pairs = np.array(ordered_map(replicate, list(range(reps)), threads))
        return pairs, kernel_moment(kernel, config, seed=seed)

    (pairs, moment), elapsed = run()
    mean_full, se_full = _mean_and_se(pairs[:, 0])
    mean_part, se_part = _mean_and_se(pairs[:, 1])
    combined = math.hypot(se_full, se_part)
    diff = mean_part - mean_full
    return _finish(
        CheckReport(
            name="subsample_mean",
            statistic={
                "mean_full": mean_full,
                "mean_partition": mean_part,
                "se_full": se_full,
                "se_partition": se_part,
                "difference": diff,
                "max_abs_replicate_difference": float(np.max(np.abs(pairs[:, 1] - pairs[:, 0]))),
            },
            reference={"mu": moment.value, "mu_error": moment.error_estimate, "method": moment.method},
            z_or_ratio=abs(diff) / combined if combined > 0 else 0.0,
            tolerance={"z": MEAN_Z},
            replicates={"reps": reps, "n": n, "K": K, "tau": tau},
            seed=seed,
            runtime=elapsed,
            details={"kernel": kernel.spec(), "config": config.name},
        )
    )


def _cell_means(kernel, configs, K, tau, rng) -> np.ndarray:
    return batch_copy_densities(sample_cells(K, tau, kernel, rng), configs).mean(axis=0)


def check_clt_partition_mean(
    kernel: Kernel,
    config: SubgraphConfig,
    n_per_part: int,
    K_list: Sequence[int],
    reps: int,
    seed: int = 0,
    threads: Optional[int] = None,
) -> CheckReport:
    """
    Partition-mean density over K equal cells: variance scales like 1/K, and
    at the largest K the standardized statistic looks normal.
    """
    K_list = sorted(int(K) for K in K_list)
    if len(K_list) < 2 or K_list[0] < 1:
        raise ValueError("need at least two positive K values")
    if n_per_part < config.node_count:
        raise ValueError(
            f"cells of {n_per_part} vertices cannot hold configuration {config.name}"
        )

    def replicate(K: int, rep: int) -> float:
        rng = np.random.default_rng(_replicate_seed(seed, K, rep))
        return float(_cell_means(kernel, [config], K, n_per_part, rng)[0])

    @timed("check_clt_partition_mean")
    def run():
        return {
            K: np.array(ordered_map(lambda rep: replicate(K, rep), list(range(reps)), threads))
            for K in K_list
        }

    samples, elapsed = run()
    variances = [float(samples[K].var(ddof=1)) for K in K_list]
    base = dict(
        name="clt_partition_mean",
        reference={"variance_ratio": "K_b / K_a", "normal_shape": {"skewness": 0.0, "excess_kurtosis": 0.0}},
        tolerance={
            "scaling_band": list(SCALING_BAND),
            "max_skewness": MAX_SKEW,
            "max_excess_kurtosis": MAX_EXCESS_KURTOSIS,
            "shape_min_reps": SHAPE_MIN_REPS,
        },
        replicates={"reps": reps, "n_per_part": n_per_part, "K_list": K_list},
        seed=seed,
        runtime=elapsed,
        details={"kernel": kernel.spec(), "config": config.name},
    )
    if min(variances) == 0.0:
        return _finish(
            CheckReport(
                statistic={"variances": variances, "scaling_ratios": []},
                z_or_ratio=0.0,
                note="degenerate (zero variance), skipped",
                skipped=True,
                **base,
            )
        )

    ratios = []
    for (Ka, va), (Kb, vb) in combinations(zip(K_list, variances), 2):
        ratios.append((va / vb) / (Kb / Ka))
    largest = samples[K_list[-1]]
    skew = kurt = None
    note = ""
    if reps >= SHAPE_MIN_REPS:
        standardized = (largest - largest.mean()) / largest.std(ddof=1)
        skew = float(stats.skew(standardized))
        kurt = float(stats.kurtosis(standardized))
    else:
        note = f"shape test needs reps >= {SHAPE_MIN_REPS}; only variance scaling checked"
    return _finish(
        CheckReport(
            statistic={
                "variances": variances,
                "scaling_ratios": ratios,
                "skewness": skew,
                "excess_kurtosis": kurt,
            },
            z_or_ratio=max(abs(math.log(ratio)) for ratio in ratios),
            note=note,
            **base,
        )
    )


def _leading_pair(kernel, configs, K, tau, N, rng):
    columns = [_cell_means(kernel, configs, K, tau, rng) for _ in range(N)]
    try:
        d = standardize_rows(np.column_stack(columns), unit_sd=False, row_names=[c.name for c in configs])
    except DegenerateDataError:
        return None
    if d.p != len(configs):
        return None
    result = pca(d)
    return result.eigenvalues[0], result.eigenvalues[1], result.loading(1)


def check_clt_eigen(
    kernel: Kernel,
    configs: Sequence[SubgraphConfig],
    n: int,
    K: int,
    tau: int,
    N_list: Sequence[int],
    reps: int,
    seed: int = 0,
    threads: Optional[int] = None,
) -> CheckReport:
    """
    Leading eigenvalue of the unstandardized covariance of partition-mean
    densities: N * var(gamma_hat_1) should be stable across N and close to
    2 gamma_1^2, and the leading eigenvector error should shrink like 1/N.
    The pooled Monte Carlo mean stands in for the unknown gamma_1 and w_1.
    """
    configs = list(configs)
    N_list = sorted(int(N) for N in N_list)
    check_feasible(n, K, tau)
    if K * tau != n:
        raise ValueError(f"equal-size cells required: K*tau = {K * tau} but n = {n}")
    if len(configs) < 2 or len(N_list) < 2:
        raise ValueError("need at least two configurations and two sample sizes")
    base = dict(
        name="clt_eigen",
        tolerance={"factor": VARIANCE_FACTOR},
        replicates={"reps": reps, "N_list": N_list, "n": n, "K": K, "tau": tau},
        seed=seed,
        details={"kernel": kernel.spec(), "configs": [c.name for c in configs]},
    )
    violated = "assumption gamma_1 > gamma_2 violated, skipped"
    if kernel.is_constant:
        return _finish(
            CheckReport(
                statistic={}, reference={}, z_or_ratio=0.0, note=violated, skipped=True, **base
            )
        )

    def replicate(N: int, rep: int):
        rng = np.random.default_rng(_replicate_seed(seed, N, rep))
        return _leading_pair(kernel, configs, K, tau, N, rng)

    @timed("check_clt_eigen")
    def run():
        return {
            N: ordered_map(lambda rep: replicate(N, rep), list(range(reps)), threads) for N in N_list
        }

    outcomes, elapsed = run()
    base["runtime"] = elapsed
    if any(o is None for N in N_list for o in outcomes[N]):
        return _finish(
            CheckReport(
                statistic={}, reference={}, z_or_ratio=0.0,
                note="a configuration had zero variance in some replicate, skipped",
                skipped=True, **base,
            )
        )

    scaled, vector_errors, gamma_means, gaps = [], [], [], []
    for N in N_list:
        gamma1 = np.array([o[0] for o in outcomes[N]])
        gap = gamma1 - np.array([o[1] for o in outcomes[N]])
        vectors = np.array([o[2] for o in outcomes[N]])
        gap_mean, gap_se = _mean_and_se(gap)
        if gap_mean < MEAN_Z * gap_se:
            return _finish(
                CheckReport(
                    statistic={"gap_mean": gap_mean, "gap_se": gap_se, "N": N},
                    reference={}, z_or_ratio=0.0, note=violated, skipped=True, **base,
                )
            )
        center = vectors.mean(axis=0)
        center /= np.linalg.norm(center)
        scaled.append(float(N * gamma1.var(ddof=1)))
        vector_errors.append(float(N * np.mean(np.sum((vectors - center) ** 2, axis=1))))
        gamma_means.append(float(gamma1.mean()))
        gaps.append(gap_mean)

    reference = 2.0 * gamma_means[-1] ** 2
    return _finish(
        CheckReport(
            statistic={
                "scaled_variances": scaled,
                "gamma1_means": gamma_means,
                "gap_means": gaps,
                "n_times_vector_error": vector_errors,
            },
            reference={"two_gamma_squared": reference},
            z_or_ratio=scaled[-1] / reference,
            **base,
        )
    )


@dataclass
class SampleSpec:
    """Recipe for a kernel-based random graph sample."""

    kernel: Kernel
    N: int
    n: int
    seed: int = 0

    def draw(self, threads: Optional[int] = None) -> NetworkSample:
        return sample_network(self.N, self.n, self.kernel, self.seed, threads=threads)


def _aligned(names: List[str], vector: np.ndarray, union: List[str]) -> np.ndarray:
    lookup = dict(zip(names, vector))
    return np.array([lookup.get(name, 0.0) for name in union])


def _abs_cosine(a: np.ndarray, b: np.ndarray) -> float:
    norm = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    if norm == 0:
        return 0.0
    return min(abs(float(np.dot(a, b))) / norm, 1.0)


def compare_pcan_spcan(
    sample: Union[SampleSpec, NetworkSample],
    K: int,
    tau: int,
    reps: int,
    seed: int = 0,
    configs: Optional[Sequence[SubgraphConfig]] = None,
    threads: Optional[int] = None,
) -> CheckReport:
    """
    One PCAN run against `reps` sPCAN runs on the same sample: PC1 loading
    agreement (|cosine| over the union of retained configurations),
    variance-explained spread, and the PCAN / sPCAN wall-clock ratio.
    """
    if isinstance(sample, SampleSpec):
        sample = sample.draw(threads)
    configs = list(configs) if configs is not None else default_configuration_set()

    @timed("pcan")
    def run_pcan():
        return pcan(sample, PcanSettings(configs=configs, threads=threads))

    (_, full), pcan_time = run_pcan()
    # variance shares are only comparable over the same rows
    retained = [c for c in configs if c.name in full.row_names]

    @timed("spcan")
    def run_spcan(rep: int):
        rep_seed = int(_replicate_seed(seed, rep).generate_state(1)[0])
        settings = PcanSettings(configs=retained, K=K, tau=tau, seed=rep_seed, threads=threads)
        return spcan(sample, settings)

    cosines, spcan_times, explained, mismatched = [], [], [], 0
    for rep in range(reps):
        (_, sub, _), elapsed = run_spcan(rep)
        union = sorted(set(full.row_names) | set(sub.row_names), key=[c.name for c in configs].index)
        cosines.append(
            _abs_cosine(
                _aligned(full.row_names, full.loading(1), union),
                _aligned(sub.row_names, sub.loading(1), union),
            )
        )
        spcan_times.append(elapsed)
        explained.append(sub.variance_explained)
        mismatched += int(sub.row_names != full.row_names)

    width = min(len(full.variance_explained), min(len(v) for v in explained))
    spread = np.array([v[:width] for v in explained])
    brackets = [
        bool(spread[:, pc].min() <= full.variance_explained[pc] <= spread[:, pc].max())
        for pc in range(width)
    ]
    speed_ratio = pcan_time / float(np.median(spcan_times)) if np.median(spcan_times) > 0 else math.inf
    median_cosine = float(np.median(cosines))
    return _finish(
        CheckReport(
            name="compare_pcan_spcan",
            statistic={
                "median_abs_cosine_pc1": median_cosine,
                "cosines_pc1": cosines,
                "pcan_variance_explained": full.variance_explained[:width],
                "spcan_variance_explained_min": spread.min(axis=0),
                "spcan_variance_explained_median": np.median(spread, axis=0),
                "spcan_variance_explained_max": spread.max(axis=0),
                "pcan_inside_spcan_range": brackets,
                "speed_ratio": speed_ratio,
                "pcan_seconds": pcan_time,
                "spcan_median_seconds": float(np.median(spcan_times)),
                "runs_with_other_rows": mismatched,
            },
            reference={"speed_applies": sample.n_min >= SPEED_MIN_N},
            z_or_ratio=median_cosine,
            tolerance={"min_cosine": MIN_COSINE, "min_speed_ratio": 1.0},
            replicates={"reps": reps, "N": len(sample), "n_min": sample.n_min, "K": K, "tau": tau},
            seed=seed,
            runtime=pcan_time + float(np.sum(spcan_times)),
            details={"configs": [c.name for c in configs], "compared_rows": list(full.row_names)},
        )
    )


SYMMETRIC_BLOCK = "block:0.8,0.1,0.1,0.8"


def _budgets(fast: bool) -> Dict[str, Dict[str, Any]]:
    return {
        "mean_density": {"N": 100 if fast else 500},
        "subsample_mean": {"reps": 60 if fast else 300},
        "clt_partition_mean": {"reps": 400 if fast else 2000},
        "clt_eigen": {"N_list": (50, 200) if fast else (100, 400), "reps": 60 if fast else 300},
        "compare_pcan_spcan": {"N": 30 if fast else 60, "n": 150 if fast else 300, "reps": 10 if fast else 100},
    }


def run_named_check(name: str, seed: int = 0, fast: bool = False, threads: Optional[int] = None) -> CheckReport:
    """Run one registered check at its default (or fast) budget."""
    if name not in CRITERIA:
        raise KeyError(name)
    budget = _budgets(fast)[name]
    if name == "mean_density":
        return check_mean_density(ConstantKernel(0.5), triangle(), 40, budget["N"], seed, threads)
    if name == "subsample_mean":
        return check_subsample_mean(ConstantKernel(0.2), star(1), 120, 10, 12, budget["reps"], seed, threads)
    if name == "clt_partition_mean":
        return check_clt_partition_mean(ConstantKernel(0.3), star(1), 20, (25, 100), budget["reps"], seed, threads)
    if name == "clt_eigen":
        return check_clt_eigen(
            parse_kernel(SYMMETRIC_BLOCK),
            [star(1), star(2), triangle()],
            240, 20, 12, budget["N_list"], budget["reps"], seed, threads,
        )
    spec = SampleSpec(parse_kernel(SYMMETRIC_BLOCK), budget["N"], budget["n"], seed)
    K = 25 if not fast else 12
    return compare_pcan_spcan(spec, K, 12, budget["reps"], seed, threads=threads)


CHECK_NAMES = tuple(CRITERIA)
