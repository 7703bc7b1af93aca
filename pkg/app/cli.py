"""
Command-line surface: census, embed, generate and verify.

Usage:
    python -m app census   --manifest samples/manifest.csv --out out/
    python -m app embed    --manifest samples/manifest.csv --algo spcan --seed 7 --out out/
    python -m app generate --kernel constant:0.3 --n 50 --count 10 --seed 1 --out samples/
    python -m app verify   --all --fast --out reports/

Exit status: 0 success, 1 data or feasibility error (or a failed check), 2 usage error.
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from app.analysis.pca import contributions, reconstruct, reconstruction_errors, unstandardize
from app.census.configs import (
    CONFIG_NAMES,
    CountMode,
    SubgraphConfig,
    default_configuration_set,
    parse_config_list,
)
from app.census.counting import census_rows
from app.graphs.edge_list import load_manifest, write_edge_list, write_manifest
from app.krg.kernels import parse_kernel
from app.krg.sampler import sample_network
from app.pipelines.embed import PcanSettings, pcan, resolve_tau_k, spcan
from app.services.config import CONFIG
from app.services.reports import save_text, write_csv, write_json
from app.services.utils import format_float, ordered_map, timed
from app.verify.checks import CHECK_NAMES, run_named_check

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Invalid flags; maps to exit status 2."""


@dataclass
class RunConfig:
    """Validated command-line settings for one invocation."""

    subcommand: str
    out: Path
    seed: int
    threads: int
    manifest: Optional[Path] = None
    configs: List[SubgraphConfig] = field(default_factory=default_configuration_set)
    mode: CountMode = CountMode.COPIES
    algo: str = "pcan"
    r: Union[int, str] = "all"
    tau: Optional[int] = None
    K: Optional[int] = None
    unit_sd: bool = True
    gnuplot: bool = False
    reconstruct: bool = False
    kernel: Optional[str] = None
    n: Optional[int] = None
    count: Optional[int] = None
    checks: List[str] = field(default_factory=list)
    fast: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        """Check every flag up front and report all problems in one message."""
        problems: List[str] = []
        command = args.command

        configs = default_configuration_set()
        if getattr(args, "configs", None):
            try:
                configs = parse_config_list(args.configs)
            except ValueError as e:
                problems.append(str(e))
        mode = CountMode.COPIES
        if getattr(args, "mode", None):
            try:
                mode = CountMode.parse(args.mode)
            except ValueError as e:
                problems.append(str(e))
        if command in ("census", "embed") and not args.manifest:
            problems.append(f"{command} needs --manifest")
        if args.threads is not None and args.threads < 1:
            problems.append(f"--threads must be at least 1, got {args.threads}")
        if args.seed is not None and args.seed < 0:
            problems.append(f"--seed must be non-negative, got {args.seed}")

        r: Union[int, str] = "all"
        if command == "embed":
            r = _parse_r(args.r, problems)
            if args.algo == "pcan" and (args.tau is not None or args.K is not None):
                problems.append("--tau and --K only apply to --algo spcan")
            for flag, value in (("--tau", args.tau), ("--K", args.K)):
                if value is not None and value < 1:
                    problems.append(f"{flag} must be at least 1, got {value}")
        if command == "generate":
            if args.n < 1:
                problems.append(f"--n must be at least 1, got {args.n}")
            if args.count < 1:
                problems.append(f"--count must be at least 1, got {args.count}")
        checks: List[str] = []
        if command == "verify":
            if args.all and args.check:
                problems.append("use either --all or --check, not both")
            elif not args.all and not args.check:
                problems.append("verify needs --all or at least one --check")
            unknown = [name for name in (args.check or []) if name not in CHECK_NAMES]
            if unknown:
                problems.append(
                    f"unknown check(s) {', '.join(unknown)}; choose from {', '.join(CHECK_NAMES)}"
                )
            checks = list(CHECK_NAMES) if args.all else list(dict.fromkeys(args.check or []))

        if problems:
            raise UsageError("; ".join(problems))

        return cls(
            subcommand=command,
            out=Path(args.out),
            seed=args.seed if args.seed is not None else CONFIG.default_seed,
            threads=args.threads or CONFIG.threads,
            manifest=Path(args.manifest) if getattr(args, "manifest", None) else None,
            configs=configs,
            mode=mode,
            algo=getattr(args, "algo", "pcan"),
            r=r,
            tau=getattr(args, "tau", None),
            K=getattr(args, "K", None),
            unit_sd=not getattr(args, "no_unit_sd", False),
            gnuplot=getattr(args, "gnuplot", False),
            reconstruct=getattr(args, "reconstruct", False),
            kernel=getattr(args, "kernel", None),
            n=getattr(args, "n", None),
            count=getattr(args, "count", None),
            checks=checks,
            fast=getattr(args, "fast", False),
        )

    def settings(self) -> PcanSettings:
        return PcanSettings(
            configs=self.configs,
            r=self.r,
            mode=self.mode,
            unit_sd=self.unit_sd,
            seed=self.seed,
            K=self.K,
            tau=self.tau,
            threads=self.threads,
        )


def _parse_r(text: Optional[str], problems: List[str]) -> Union[int, str]:
    if text is None or text.strip().lower() == "all":
        return "all"
    try:
        value = int(text)
    except ValueError:
        problems.append(f"--r must be a positive integer or 'all', got {text!r}")
        return "all"
    if value < 1:
        problems.append(f"--r must be a positive integer or 'all', got {text!r}")
    return value


def cmd_census(run: RunConfig) -> int:
    """Write census.csv: one row per (graph, configuration)."""
    sample = load_manifest(run.manifest)
    per_graph = ordered_map(
        lambda g: census_rows(g, run.configs, run.mode), sample.graphs, run.threads
    )
    rows = [
        {"graph_id": graph_id, **row}
        for graph_id, graph_rows in zip(sample.ids, per_graph)
        for row in graph_rows
    ]
    count = write_csv(rows, run.out / "census.csv", ["graph_id", "config", "count", "max_count", "density"])
    logger.info(f"census: {len(sample)} graphs x {len(run.configs)} configurations = {count} rows")
    return EXIT_OK


def _settings_echo(run: RunConfig, tau: Optional[int], K: Optional[int]) -> Dict:
    return {
        "algorithm": run.algo,
        "configs": [c.name for c in run.configs],
        "mode": run.mode.value,
        "r": run.r,
        "unit_sd": run.unit_sd,
        "seed": run.seed,
        "tau": tau,
        "K": K,
    }


def _gnuplot_scripts(out: Path, r: int) -> None:
    scree = (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set xlabel 'component'\n"
        "set ylabel 'variance explained'\n"
        "plot 'scree.csv' using 1:3 with linespoints title 'variance explained', \\\n"
        "     'scree.csv' using 1:4 with linespoints title 'cumulative'\n"
    )
    save_text(scree, out / "scree.gp")
    if r >= 2:
        scores = (
            "set datafile separator ','\n"
            "set xlabel 'PC1'\n"
            "set ylabel 'PC2'\n"
            "plot 'scores.csv' using 3:4:1 with labels point pt 7 offset char 1,1 notitle\n"
        )
        save_text(scores, out / "scores.gp")


def cmd_embed(run: RunConfig) -> int:
    """Run PCAN or sPCAN and write result.json, scores.csv, contributions.csv and scree.csv."""
    sample = load_manifest(run.manifest)
    settings = run.settings()
    tau = K = None
    partition_methods: Dict[str, int] = {}

    if run.algo == "spcan":
        tau, K = resolve_tau_k(sample, settings)
        settings.tau, settings.K = tau, K
        (d, result, plans), elapsed = timed("spcan")(spcan)(sample, settings)
        for plan in plans:
            partition_methods[plan.method] = partition_methods.get(plan.method, 0) + 1
    else:
        (d, result), elapsed = timed("pcan")(pcan)(sample, settings)

    r = result.r
    residuals = reconstruction_errors(result, d, r)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "settings": _settings_echo(run, tau, K),
        "seed": run.seed,
        "graphs": len(sample),
        "eigenvalues": result.eigenvalues,
        "variance_explained": result.variance_explained,
        "loadings": [
            {"pc": pc, "values": dict(zip(result.row_names, result.loading(pc).tolist()))}
            for pc in range(1, len(result.eigenvalues) + 1)
        ],
        "dropped_rows": [{"config": name, "reason": reason} for name, reason in d.dropped_rows],
        "near_degenerate_gaps": result.near_degenerate,
        "runtime": elapsed,
    }
    if partition_methods:
        payload["partition_methods"] = partition_methods
    write_json(payload, run.out / "result.json")

    score_rows = []
    for i, graph_id in enumerate(sample.ids):
        row = {"graph_id": graph_id, "label": sample.label_of(i)}
        row.update({f"score_{pc + 1}": float(result.scores[i, pc]) for pc in range(r)})
        row["residual"] = float(residuals[i])
        score_rows.append(row)
    write_csv(
        score_rows,
        run.out / "scores.csv",
        ["graph_id", "label"] + [f"score_{pc + 1}" for pc in range(r)] + ["residual"],
    )

    contribution_rows = []
    for pc in range(1, r + 1):
        loading = result.loading(pc)
        for name, value, percent in zip(result.row_names, loading, contributions(loading)):
            contribution_rows.append(
                {"config": name, "pc": pc, "loading": float(value), "percent": float(percent)}
            )
    write_csv(contribution_rows, run.out / "contributions.csv", ["config", "pc", "loading", "percent"])

    cumulative = np.cumsum(result.variance_explained)
    scree_rows = [
        {
            "pc": pc + 1,
            "eigenvalue": float(result.eigenvalues[pc]),
            "variance_explained": float(result.variance_explained[pc]),
            "cumulative": float(cumulative[pc]),
        }
        for pc in range(len(result.eigenvalues))
    ]
    write_csv(scree_rows, run.out / "scree.csv", ["pc", "eigenvalue", "variance_explained", "cumulative"])

    if run.reconstruct:
        approx = unstandardize(d, reconstruct(result, r))
        original = unstandardize(d, d.values)
        rows = [
            {
                "graph_id": graph_id,
                "config": name,
                "density": float(original[j, i]),
                "reconstructed": float(approx[j, i]),
            }
            for i, graph_id in enumerate(sample.ids)
            for j, name in enumerate(result.row_names)
        ]
        write_csv(rows, run.out / "reconstruction.csv", ["graph_id", "config", "density", "reconstructed"])
    if run.gnuplot:
        _gnuplot_scripts(run.out, r)

    logger.info(
        f"{run.algo}: {len(sample)} graphs, {d.p} configurations kept, r={r}, "
        f"PC1 explains {format_float(result.variance_explained[0])}"
    )
    return EXIT_OK


def cmd_generate(run: RunConfig) -> int:
    """Sample graphs from a kernel and write edge lists, JSON sidecars and manifest.csv."""
    kernel = parse_kernel(run.kernel)
    sample = sample_network(run.count, run.n, kernel, run.seed, threads=run.threads)
    paths = []
    for i, (graph_id, g) in enumerate(zip(sample.ids, sample.graphs)):
        paths.append(write_edge_list(g, run.out / f"{graph_id}.edges"))
        write_json(
            {
                "id": graph_id,
                "kernel": kernel.spec(),
                "seed": run.seed,
                "index": i,
                "n": g.n,
                "edges": g.edge_count,
                "latents": g.latents,
            },
            run.out / f"{graph_id}.json",
        )
    write_manifest(run.out / "manifest.csv", sample.ids, paths)
    logger.info(f"generate: {run.count} graphs from {kernel.spec()} in {run.out}")
    return EXIT_OK


def _summary_table(reports) -> str:
    header = f"{'check':<22} {'status':<8} {'z_or_ratio':>12} {'runtime_s':>10}  note"
    lines = [header, "-" * len(header)]
    for report in reports:
        lines.append(
            f"{report.name:<22} {report.status:<8} {report.z_or_ratio:>12.4g} "
            f"{report.runtime:>10.2f}  {report.note}"
        )
    return "\n".join(lines)


def cmd_verify(run: RunConfig) -> int:
    """Run the selected checks; write <check>.json per report and print a summary table."""
    reports = []
    for name in run.checks:
        report = run_named_check(name, seed=run.seed, fast=run.fast, threads=run.threads)
        write_json(report.to_dict(), run.out / f"{name}.json")
        reports.append(report)
    print(_summary_table(reports))
    return EXIT_OK if all(report.ok for report in reports) else EXIT_DATA


COMMANDS = {
    "census": cmd_census,
    "embed": cmd_embed,
    "generate": cmd_generate,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--seed", type=int, default=None, help="master seed (default: NETPCA_SEED)")
    common.add_argument("--threads", type=int, default=None, help="worker-pool size (default: NETPCA_THREADS)")

    sample = argparse.ArgumentParser(add_help=False)
    sample.add_argument("--manifest", help="CSV with columns id,path[,label]")
    sample.add_argument(
        "--configs", help=f"comma list from {{{','.join(CONFIG_NAMES)}}} (default: all nine)"
    )
    sample.add_argument("--mode", default="copies", help="copies (default) or induced")

    parser = argparse.ArgumentParser(
        prog="python -m app", description="Principal components of network samples."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("census", parents=[common, sample], help="subgraph counts and densities")

    embed = sub.add_parser("embed", parents=[common, sample], help="PCAN / sPCAN embedding")
    embed.add_argument("--algo", choices=("pcan", "spcan"), default="pcan")
    embed.add_argument("--r", default="all", help="components to keep, or 'all'")
    embed.add_argument("--tau", type=int, default=None, help="minimum partition class size (spcan)")
    embed.add_argument("--K", type=int, default=None, help="number of partition classes (spcan)")
    embed.add_argument("--no-unit-sd", action="store_true", help="center rows without scaling")
    embed.add_argument("--gnuplot", action="store_true", help="also write gnuplot scripts")
    embed.add_argument("--reconstruct", action="store_true", help="write rank-r reconstruction.csv")

    generate = sub.add_parser("generate", parents=[common], help="sample kernel-based random graphs")
    generate.add_argument("--kernel", required=True, help="e.g. constant:0.3 or block:0.8,0.1,0.1,0.8")
    generate.add_argument("--n", type=int, required=True, help="vertices per graph")
    generate.add_argument("--count", type=int, required=True, help="number of graphs")

    verify = sub.add_parser("verify", parents=[common], help="Monte Carlo theory checks")
    verify.add_argument("--check", action="append", help=f"one of {', '.join(CHECK_NAMES)}; repeatable")
    verify.add_argument("--all", action="store_true", help="run every check")
    verify.add_argument("--fast", action="store_true", help="reduced Monte Carlo budgets")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    try:
        run = RunConfig.from_args(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return COMMANDS[run.subcommand](run)
    except (ValueError, OSError) as e:
        logger.error(f"{run.subcommand} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
