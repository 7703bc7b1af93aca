"""
Edge-list and manifest file formats.

Edge list: UTF-8 text, one edge per line as two whitespace-separated vertex
tokens. A single token declares an (isolated) vertex. Lines starting with '#'
are comments and blank lines are ignored.

Manifest: CSV with header; required columns `id,path`, optional `label`.
Paths are resolved relative to the manifest's directory.
"""

import csv
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from app.graphs.graph import Graph, NetworkSample
from app.services.errors import GraphFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


@dataclass
class LoadReport:
    """What was cleaned up while reading an edge list."""

    path: str
    vertices: int
    edges: int
    self_loops_dropped: int = 0
    duplicates_dropped: int = 0


def read_edge_list(path: PathLike, label: Optional[str] = None) -> Tuple[Graph, LoadReport]:
    """
    Parse an edge-list file.

    Vertex tokens are mapped to indices 0..n-1 in order of first appearance.
    Self-loops and repeated edges (in either orientation) are dropped and counted.

    Returns:
        The graph (with its token map attached) and a LoadReport.
    """
    index: Dict[str, int] = {}
    tokens: List[str] = []
    seen = set()
    edges: List[Tuple[int, int]] = []
    loops = duplicates = 0

    def vertex(token: str) -> int:
        if token not in index:
            index[token] = len(tokens)
            tokens.append(token)
        return index[token]

    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) == 1:
                vertex(parts[0])
                continue
            if len(parts) != 2:
                raise GraphFormatError(
                    f"expected 1 or 2 vertex tokens, found {len(parts)}", line=line_no
                )
            u, v = vertex(parts[0]), vertex(parts[1])
            if u == v:
                loops += 1
                continue
            key = (u, v) if u < v else (v, u)
            if key in seen:
                duplicates += 1
                continue
            seen.add(key)
            edges.append(key)

    if not tokens:
        raise GraphFormatError(f"{path}: no vertices found; a graph needs at least one vertex")

    graph = Graph(len(tokens), edges, label=label, tokens=tokens)
    report = LoadReport(
        path=str(path),
        vertices=graph.n,
        edges=graph.edge_count,
        self_loops_dropped=loops,
        duplicates_dropped=duplicates,
    )
    if loops or duplicates:
        logger.warning(
            f"{path}: dropped {loops} self-loop(s) and {duplicates} duplicate edge(s)"
        )
    return graph, report


def load_edge_list(path: PathLike, label: Optional[str] = None) -> Graph:
    """Read an edge-list file and return the graph; cleanup counts are logged."""
    graph, _ = read_edge_list(path, label=label)
    return graph


def write_edge_list(graph: Graph, path: PathLike) -> Path:
    """
    Write graph as an edge list using its vertex tokens.

    Isolated vertices are written as lone-token lines so they survive a reload.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{graph.token(u)} {graph.token(v)}" for u, v in graph.edges()]
    lines.extend(graph.token(v) for v in range(graph.n) if graph.degrees[v] == 0)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines))
        if lines:
            f.write("\n")
    return path


def load_manifest(path: PathLike) -> NetworkSample:
    """
    Load every graph listed in a manifest, in row order.

    Raises:
        GraphFormatError: missing required columns or duplicate ids
        FileNotFoundError: a referenced graph file does not exist (row named)
    """
    path = Path(path)
    base = path.parent
    graphs: List[Graph] = []
    ids: List[str] = []
    labels: List[Optional[str]] = []

    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        columns = [c.strip() for c in (reader.fieldnames or [])]
        missing = {"id", "path"} - set(columns)
        if missing:
            raise GraphFormatError(
                f"{path}: manifest is missing column(s) {', '.join(sorted(missing))}"
            )
        has_label = "label" in columns

        for row_no, raw in enumerate(reader, start=1):
            row = {(k or "").strip(): (v or "").strip() for k, v in raw.items()}
            graph_id = row["id"]
            if graph_id in ids:
                raise GraphFormatError(f"{path}: row {row_no}: duplicate id {graph_id!r}")
            graph_path = base / row["path"]
            if not graph_path.is_file():
                raise FileNotFoundError(
                    f"{path}: row {row_no} (id {graph_id!r}): graph file {graph_path} not found"
                )
            try:
                graphs.append(load_edge_list(graph_path, label=graph_id))
            except GraphFormatError as e:
                raise GraphFormatError(f"{path}: row {row_no} (id {graph_id!r}): {e}")
            ids.append(graph_id)
            labels.append(row.get("label") or None)

    if not graphs:
        raise GraphFormatError(f"{path}: manifest lists no graphs")

    logger.info(f"Loaded {len(graphs)} graphs from {path}")
    return NetworkSample(graphs=graphs, ids=ids, labels=labels if has_label else None)


def write_manifest(
    path: PathLike,
    ids: Sequence[str],
    graph_paths: Sequence[PathLike],
    labels: Optional[Sequence[Optional[str]]] = None,
) -> Path:
    """Write a manifest; graph paths are stored relative to the manifest directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fieldnames = ["id", "path"] + (["label"] if labels is not None else [])
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for i, (graph_id, graph_path) in enumerate(zip(ids, graph_paths)):
            row = {"id": graph_id, "path": os.path.relpath(graph_path, path.parent)}
            if labels is not None:
                row["label"] = labels[i] or ""
            writer.writerow(row)
    return path
