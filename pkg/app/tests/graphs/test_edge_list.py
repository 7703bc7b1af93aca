import pytest

from app.graphs.edge_list import (
    load_edge_list,
    load_manifest,
    read_edge_list,
    write_edge_list,
    write_manifest,
)
from app.graphs.graph import Graph, empty_graph
from app.services.errors import GraphFormatError


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_read_two_edges(tmp_path):
    g = load_edge_list(_write(tmp_path, "g.txt", "0 1\n1 2\n"))
    assert g.n == 3
    assert list(g.edges()) == [(0, 1), (1, 2)]
    assert g.tokens == ("0", "1", "2")


def test_read_duplicate_and_lone_token(tmp_path):
    g, report = read_edge_list(_write(tmp_path, "g.txt", "a b\nb a\nc\n"))
    assert g.n == 3
    assert g.edge_count == 1
    assert g.degrees[g.tokens.index("c")] == 0
    assert report.duplicates_dropped == 1
    assert report.self_loops_dropped == 0


def test_read_self_loop_dropped(tmp_path):
    g, report = read_edge_list(_write(tmp_path, "g.txt", "0 0\n0 1\n"))
    assert g.n == 2 and g.edge_count == 1
    assert report.self_loops_dropped == 1


def test_read_skips_comments_and_blank_lines(tmp_path):
    g = load_edge_list(_write(tmp_path, "g.txt", "# header\n\nx y\n  \n# done\n"))
    assert g.n == 2 and g.edge_count == 1


def test_read_malformed_line_reports_line_number(tmp_path):
    path = _write(tmp_path, "g.txt", "0 1\n1 2 3\n")
    with pytest.raises(GraphFormatError, match="line 2"):
        load_edge_list(path)


def test_read_empty_file_is_an_error(tmp_path):
    with pytest.raises(GraphFormatError, match="at least one vertex"):
        load_edge_list(_write(tmp_path, "g.txt", "# nothing\n"))


def test_write_then_read_round_trip(tmp_path):
    g = Graph(5, [(0, 3), (3, 1)], tokens=["a", "b", "c", "d", "e"])
    path = write_edge_list(g, tmp_path / "out.edges")
    h = load_edge_list(path)
    assert set(h.tokens) == set(g.tokens)
    assert sorted(h.degrees.tolist()) == sorted(g.degrees.tolist())
    named = {frozenset((h.token(u), h.token(v))) for u, v in h.edges()}
    assert named == {frozenset(("a", "d")), frozenset(("d", "b"))}


def test_write_empty_graph_lists_every_vertex(tmp_path):
    path = write_edge_list(empty_graph(4), tmp_path / "empty.edges")
    assert path.read_text().splitlines() == ["0", "1", "2", "3"]


# ----- manifests -----
@pytest.fixture
def three_graphs(tmp_path):
    paths = [
        _write(tmp_path, "a.txt", "0 1\n"),
        _write(tmp_path, "b.txt", "0 1\n1 2\n"),
        _write(tmp_path, "c.txt", "0\n"),
    ]
    return tmp_path, paths


def test_manifest_keeps_row_order(three_graphs):
    tmp_path, _ = three_graphs
    manifest = _write(tmp_path, "m.csv", "id,path\nA,a.txt\nB,b.txt\nC,c.txt\n")
    sample = load_manifest(manifest)
    assert sample.ids == ["A", "B", "C"]
    assert [g.n for g in sample.graphs] == [2, 3, 1]
    assert sample.labels is None


def test_manifest_labels_attached(three_graphs):
    tmp_path, _ = three_graphs
    manifest = _write(tmp_path, "m.csv", "id,path,label\nA,a.txt,case\nB,b.txt,control\n")
    assert load_manifest(manifest).labels == ["case", "control"]


def test_manifest_missing_file_names_row(three_graphs):
    tmp_path, _ = three_graphs
    manifest = _write(tmp_path, "m.csv", "id,path\nA,a.txt\nB,missing.txt\n")
    with pytest.raises(FileNotFoundError, match="row 2"):
        load_manifest(manifest)


def test_manifest_duplicate_id(three_graphs):
    tmp_path, _ = three_graphs
    manifest = _write(tmp_path, "m.csv", "id,path\nA,a.txt\nA,b.txt\n")
    with pytest.raises(GraphFormatError, match="duplicate id"):
        load_manifest(manifest)


def test_manifest_missing_column(three_graphs):
    tmp_path, _ = three_graphs
    manifest = _write(tmp_path, "m.csv", "name,file\nA,a.txt\n")
    with pytest.raises(GraphFormatError, match="missing column"):
        load_manifest(manifest)


def test_write_manifest_round_trip(three_graphs):
    tmp_path, paths = three_graphs
    manifest = write_manifest(tmp_path / "sub" / "m.csv", ["A", "B", "C"], paths, ["x", None, "y"])
    sample = load_manifest(manifest)
    assert sample.ids == ["A", "B", "C"]
    assert sample.labels == ["x", None, "y"]
