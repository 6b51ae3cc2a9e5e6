"""Dataset loading in all three shapes, plus the synthetic corpus."""
import numpy as np
import pytest

from dpgraphgen.datasets import (
    Dataset,
    DatasetError,
    load_dataset,
    load_edge_list,
    load_multigraph_dataset,
    planted_partition_corpus,
    planted_partition_graph,
    save_dataset,
    save_edge_list,
)
from dpgraphgen.graphs import Graph
from dpgraphgen.stats import motif_census


def write(path, text):
    path.write_text(text)
    return str(path)


def test_edge_list_file_round_trip(tmp_path):
    g = Graph.from_edges(5, [(0, 1), (1, 2), (3, 4)])
    path = tmp_path / "g.edgelist"
    save_edge_list(g, path)
    back = load_edge_list(path)
    assert np.array_equal(back.adj, g.adj)


def test_load_edge_list_errors(tmp_path):
    with pytest.raises(DatasetError):
        load_edge_list(tmp_path / "missing.edgelist")
    bad = write(tmp_path / "bad.edgelist", "n 3\n0 5\n")
    with pytest.raises(DatasetError, match="bad.edgelist"):
        load_edge_list(bad)


def test_single_file_dataset(tmp_path):
    p = write(tmp_path / "solo.edgelist", "n 3\n0 1\n1 2\n")
    ds = load_dataset(p)
    assert ds.name == "solo" and ds.labels == ["solo"]
    assert len(ds.graphs) == 1 and ds.graphs[0].edge_count == 2


def test_directory_dataset_sorted_order(tmp_path):
    d = tmp_path / "corpus"
    d.mkdir()
    write(d / "b.edgelist", "n 2\n0 1\n")
    write(d / "a.edgelist", "n 3\n0 1\n1 2\n")
    write(d / "notes.txt", "ignored")
    ds = load_multigraph_dataset(str(d))
    assert ds.labels == ["a", "b"]
    assert [g.n for g in ds.graphs] == [3, 2]
    assert ds.name == "corpus"


def test_directory_without_graphs(tmp_path):
    d = tmp_path / "empty"
    d.mkdir()
    with pytest.raises(DatasetError, match="no .*edgelist"):
        load_dataset(str(d))
    with pytest.raises(DatasetError, match="does not exist"):
        load_dataset(str(tmp_path / "nowhere"))


def test_save_dataset_round_trip(tmp_path):
    ds = planted_partition_corpus(3, 8, 0.8, 0.1, seed=0)
    out = tmp_path / "saved"
    save_dataset(ds, out)
    back = load_dataset(str(out))
    assert back.labels == ds.labels
    for a, b in zip(back.graphs, ds.graphs):
        assert np.array_equal(a.adj, b.adj)


# ------------------------------------------------- indicator convention


def indicator_fixture(tmp_path, edges, indicator, name="toy"):
    e = write(tmp_path / f"{name}_A.txt", edges)
    write(tmp_path / f"{name}_graph_indicator.txt", indicator)
    return e


def test_indicator_two_triangles(tmp_path):
    # two disjoint triangles, comma-separated ids, both edge directions
    path = indicator_fixture(
        tmp_path,
        "1, 2\n2, 1\n2, 3\n3, 1\n4, 5\n5, 6\n6, 4\n",
        "1\n1\n1\n2\n2\n2\n",
    )
    ds = load_dataset(path)
    assert ds.name == "toy"
    assert ds.labels == ["toy_001", "toy_002"]
    assert len(ds.graphs) == 2
    for g in ds.graphs:
        assert g.n == 3 and g.edge_count == 3
        census = motif_census(g)
        assert census.sum() == 1  # exactly one connected 3-motif: the triangle


def test_indicator_loads_from_directory(tmp_path):
    d = tmp_path / "ds"
    d.mkdir()
    indicator_fixture(d, "1 2\n3 4\n", "1\n1\n2\n2\n")
    ds = load_dataset(str(d))
    assert [g.n for g in ds.graphs] == [2, 2]
    assert ds.name == "toy"


def test_indicator_whitespace_and_comments(tmp_path):
    path = indicator_fixture(
        tmp_path,
        "# header\n1 2\n\n   \n2 3  # inline\n",
        "1\n1\n1\n",
    )
    ds = load_dataset(path)
    assert ds.graphs[0].edges() == [(0, 1), (1, 2)]


def test_indicator_cross_graph_edge_names_both_ids(tmp_path):
    path = indicator_fixture(tmp_path, "1 3\n", "1\n1\n2\n")
    with pytest.raises(DatasetError, match=r"crosses graphs 1 and 2"):
        load_dataset(path)


def test_indicator_gapped_graph_ids(tmp_path):
    path = indicator_fixture(tmp_path, "1 2\n", "1\n1\n3\n")
    with pytest.raises(DatasetError, match="no gaps"):
        load_dataset(path)


def test_indicator_node_out_of_range(tmp_path):
    path = indicator_fixture(tmp_path, "1 9\n", "1\n1\n")
    with pytest.raises(DatasetError, match="outside the indicator"):
        load_dataset(path)


def test_indicator_malformed_lines(tmp_path):
    for edges, indicator in [
        ("1 2 3\n", "1\n1\n1\n"),
        ("1 x\n", "1\n1\n"),
    ]:
        path = indicator_fixture(tmp_path, edges, indicator)
        with pytest.raises(DatasetError, match="line 1"):
            load_dataset(path)
    path = indicator_fixture(tmp_path, "1 2\n", "1\nzz\n")
    with pytest.raises(DatasetError, match="bad graph id"):
        load_dataset(path)
    path = indicator_fixture(tmp_path, "1 2\n", "0\n1\n")
    with pytest.raises(DatasetError, match="1-based"):
        load_dataset(path)
    path = indicator_fixture(tmp_path, "1 2\n", "\n\n")
    with pytest.raises(DatasetError, match="empty indicator"):
        load_dataset(path)


def test_indicator_missing_sibling(tmp_path):
    path = write(tmp_path / "lonely_A.txt", "1 2\n")
    with pytest.raises(DatasetError, match="missing indicator"):
        load_dataset(path)


def test_indicator_self_loops_dropped_duplicates_collapsed(tmp_path):
    path = indicator_fixture(tmp_path, "1 1\n1 2\n2 1\n", "1\n1\n")
    ds = load_dataset(path)
    assert ds.graphs[0].edges() == [(0, 1)]


# ------------------------------------------------------ synthetic corpus


def test_planted_partition_structure():
    rng = np.random.default_rng(0)
    g = planted_partition_graph(20, 1.0, 0.0, rng)
    # memberships alternate, so each community is {even} / {odd} indices
    evens = [i for i in range(20) if i % 2 == 0]
    for i in evens:
        for j in evens:
            if i != j:
                assert g.adj[i, j] == 1.0
    assert g.adj[0, 1] == 0.0
    assert g.edge_count == 2 * (10 * 9 // 2)


def test_planted_partition_validation():
    rng = np.random.default_rng(1)
    with pytest.raises(ValueError):
        planted_partition_graph(1, 0.5, 0.5, rng)
    with pytest.raises(ValueError):
        planted_partition_graph(10, 1.5, 0.0, rng)
    with pytest.raises(ValueError):
        planted_partition_graph(10, 0.5, 0.5, rng, communities=0)


def test_corpus_seeded_and_labeled():
    a = planted_partition_corpus(4, 10, 0.8, 0.1, seed=5)
    b = planted_partition_corpus(4, 10, 0.8, 0.1, seed=5)
    assert a.labels == ["planted_000", "planted_001", "planted_002", "planted_003"]
    for ga, gb in zip(a.graphs, b.graphs):
        assert np.array_equal(ga.adj, gb.adj)
    c = planted_partition_corpus(4, 10, 0.8, 0.1, seed=6)
    assert any(
        not np.array_equal(ga.adj, gc.adj) for ga, gc in zip(a.graphs, c.graphs)
    )
    with pytest.raises(ValueError):
        planted_partition_corpus(0, 10, 0.8, 0.1, seed=0)


def test_corpus_graphs_differ_within_seed():
    ds = planted_partition_corpus(3, 12, 0.7, 0.1, seed=2)
    assert not np.array_equal(ds.graphs[0].adj, ds.graphs[1].adj)
