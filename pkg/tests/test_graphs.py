import numpy as np
import pytest

from dpgraphgen.graphs import (
    EdgeListFormatError,
    Graph,
    degrees,
    format_edge_list,
    normalize_adjacency,
    normalize_dense,
    one_hot_features,
    parse_edge_list,
)


def test_graph_validates_shape_and_symmetry():
    with pytest.raises(ValueError):
        Graph(3, np.zeros((3, 4)))
    bad = np.zeros((3, 3))
    bad[0, 1] = 1.0  # missing the mirror entry
    with pytest.raises(ValueError):
        Graph(3, bad)
    loop = np.zeros((3, 3))
    loop[1, 1] = 1.0
    with pytest.raises(ValueError):
        Graph(3, loop)
    with pytest.raises(ValueError):
        Graph(3, np.full((3, 3), 0.5))


def test_graph_adjacency_is_read_only():
    g = Graph.from_edges(3, [(0, 1)])
    with pytest.raises(ValueError):
        g.adj[0, 2] = 1.0


def test_from_edges_and_accessors():
    g = Graph.from_edges(4, [(2, 0), (1, 2), (2, 3)])
    assert g.edge_count == 3
    assert g.edges() == [(0, 2), (1, 2), (2, 3)]
    assert degrees(g).tolist() == [1, 1, 3, 1]
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 5)])


def test_one_hot_features_is_identity():
    x = one_hot_features(5)
    assert np.array_equal(x, np.eye(5))


def test_normalize_dense_matches_direct_formula():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        a = rng.random((n, n))
        a = (a + a.T) / 2.0
        np.fill_diagonal(a, 0.0)
        got = normalize_dense(a)
        d = a.sum(axis=1)
        want = np.zeros_like(a)
        for i in range(n):
            for j in range(n):
                if d[i] > 0 and d[j] > 0:
                    want[i, j] = a[i, j] / np.sqrt(d[i] * d[j])
        assert np.allclose(got, want, atol=1e-12)


def test_normalize_dense_zero_rows_stay_zero():
    a = np.zeros((4, 4))
    a[0, 1] = a[1, 0] = 1.0
    got = normalize_dense(a)
    assert np.all(got[2] == 0.0)
    assert np.all(got[:, 3] == 0.0)
    assert got[0, 1] == pytest.approx(1.0)


def test_normalize_dense_self_loops():
    a = np.zeros((3, 3))
    a[0, 1] = a[1, 0] = 1.0
    got = normalize_dense(a, add_self_loops=True)
    aug = a + np.eye(3)
    d = aug.sum(axis=1)
    want = aug / np.sqrt(np.outer(d, d))
    assert np.allclose(got, want, atol=1e-12)


def test_normalize_adjacency_uses_graph():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert np.allclose(normalize_adjacency(g), normalize_dense(g.adj))


def test_edge_list_round_trip():
    g = Graph.from_edges(5, [(0, 1), (1, 4), (2, 3)])
    text = format_edge_list(g)
    back = parse_edge_list(text)
    assert back.n == g.n
    assert back.edges() == g.edges()


def test_parse_edge_list_accepts_comments_and_blanks():
    text = "# a file\nn 3\n\n0 1  # inline\n"
    g = parse_edge_list(text)
    assert g.n == 3
    assert g.edges() == [(0, 1)]


def test_parse_edge_list_dedupes_both_orientations():
    g = parse_edge_list("n 3\n0 1\n1 0\n0 1\n")
    assert g.edge_count == 1


@pytest.mark.parametrize(
    "text",
    [
        "",  # no header at all
        "3\n",  # header missing the n marker
        "n 0\n",  # non-positive node count
        "n x\n",  # non-integer node count
        "n 3\n0 3\n",  # endpoint out of range
        "n 3\n1 1\n",  # self loop
        "n 3\n0\n",  # missing endpoint
        "n 3\n0 y\n",  # non-integer endpoint
    ],
)
def test_parse_edge_list_rejects_malformed(text):
    with pytest.raises(EdgeListFormatError):
        parse_edge_list(text)


def test_parse_error_reports_line_number():
    with pytest.raises(EdgeListFormatError) as exc:
        parse_edge_list("n 3\nbroken line\n")
    assert "line 2" in str(exc.value)
