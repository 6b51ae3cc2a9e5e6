"""Loading, saving, and synthesizing graph corpora.

A dataset is one edge-list file (single graph), a directory of
``*.edgelist`` files taken in sorted name order, or the two-file
indicator convention used by public graph-classification corpora: a
global edge file ``<name>_A.txt`` (1-based node ids, one ``u v`` or
``u, v`` pair per line) plus ``<name>_graph_indicator.txt`` whose i-th
line is the 1-based graph id of global node i. Nodes are reindexed
0-based and contiguous per graph; edges crossing two graphs are errors.

The synthetic corpus generator produces two-community planted-partition
graphs, the shape of data every experiment here defaults to.
"""
from __future__ import annotations

import dataclasses
import os

import numpy as np

from .graphs import EdgeListFormatError, Graph, format_edge_list, parse_edge_list
from .seeding import derive_seed


class DatasetError(ValueError):
    """Raised for unreadable or malformed dataset inputs."""


def load_edge_list(path) -> Graph:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    try:
        return parse_edge_list(text)
    except EdgeListFormatError as exc:
        raise DatasetError(f"{path}: {exc}") from exc


def save_edge_list(g: Graph, path):
    with open(path, "w") as fh:
        fh.write(format_edge_list(g))


@dataclasses.dataclass
class Dataset:
    name: str
    graphs: list[Graph]
    labels: list[str]


def _parse_indicator_pair(edge_path, indicator_path, name: str) -> Dataset:
    """Two-file convention: global 1-based edges plus node->graph map."""
    indicator = []
    with open(indicator_path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                gid = int(line)
            except ValueError:
                raise DatasetError(
                    f"{indicator_path}: line {lineno}: bad graph id {line!r}"
                )
            if gid < 1:
                raise DatasetError(
                    f"{indicator_path}: line {lineno}: graph ids are 1-based"
                )
            indicator.append(gid)
    if not indicator:
        raise DatasetError(f"{indicator_path}: empty indicator file")
    n_graphs = max(indicator)
    if sorted(set(indicator)) != list(range(1, n_graphs + 1)):
        raise DatasetError(
            f"{indicator_path}: graph ids must cover 1..{n_graphs} with no gaps"
        )
    # global node id (1-based) -> (graph id, local 0-based index)
    local = {}
    sizes = [0] * n_graphs
    for node, gid in enumerate(indicator, start=1):
        local[node] = (gid, sizes[gid - 1])
        sizes[gid - 1] += 1
    edges: list[list[tuple[int, int]]] = [[] for _ in range(n_graphs)]
    with open(edge_path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].replace(",", " ").strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DatasetError(
                    f"{edge_path}: line {lineno}: expected '<u> <v>', got {raw!r}"
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise DatasetError(
                    f"{edge_path}: line {lineno}: non-integer endpoint in {raw!r}"
                )
            if u not in local or v not in local:
                raise DatasetError(
                    f"{edge_path}: line {lineno}: node id outside the "
                    f"indicator's {len(indicator)} nodes"
                )
            gu, lu = local[u]
            gv, lv = local[v]
            if gu != gv:
                raise DatasetError(
                    f"{edge_path}: line {lineno}: edge {u}-{v} crosses "
                    f"graphs {gu} and {gv}"
                )
            if lu != lv:
                edges[gu - 1].append((lu, lv))
    graphs = [Graph.from_edges(sizes[i], edges[i]) for i in range(n_graphs)]
    labels = [f"{name}_{i + 1:03d}" for i in range(n_graphs)]
    return Dataset(name=name, graphs=graphs, labels=labels)


def _indicator_pair_in(directory):
    """Locate a <name>_A.txt / <name>_graph_indicator.txt pair, if any."""
    for f in sorted(os.listdir(directory)):
        if f.endswith("_A.txt"):
            stem = f[: -len("_A.txt")]
            ind = os.path.join(directory, f"{stem}_graph_indicator.txt")
            if os.path.isfile(ind):
                return os.path.join(directory, f), ind, stem
    return None


def load_multigraph_dataset(path) -> Dataset:
    """One edge-list file, a directory of them, or an indicator pair.

    Directories are checked for ``*.edgelist`` files first, then for the
    two-file indicator convention. A file path ending in ``_A.txt`` with
    a sibling indicator file selects the two-file form directly.
    """
    if os.path.isdir(path):
        names = sorted(f for f in os.listdir(path) if f.endswith(".edgelist"))
        if names:
            graphs = [load_edge_list(os.path.join(path, f)) for f in names]
            labels = [os.path.splitext(f)[0] for f in names]
            return Dataset(
                name=os.path.basename(os.path.normpath(path)),
                graphs=graphs,
                labels=labels,
            )
        pair = _indicator_pair_in(path)
        if pair is not None:
            return _parse_indicator_pair(*pair)
        raise DatasetError(
            f"no *.edgelist files or indicator pair under {path}"
        )
    if os.path.isfile(path):
        base = os.path.basename(path)
        if base.endswith("_A.txt"):
            stem = base[: -len("_A.txt")]
            ind = os.path.join(os.path.dirname(path), f"{stem}_graph_indicator.txt")
            if not os.path.isfile(ind):
                raise DatasetError(f"missing indicator file next to {path}")
            return _parse_indicator_pair(path, ind, stem)
        g = load_edge_list(path)
        stem = os.path.splitext(base)[0]
        return Dataset(name=stem, graphs=[g], labels=[stem])
    raise DatasetError(f"dataset path does not exist: {path}")


# short name used throughout the package
load_dataset = load_multigraph_dataset


def save_dataset(ds: Dataset, directory):
    os.makedirs(directory, exist_ok=True)
    for label, g in zip(ds.labels, ds.graphs):
        save_edge_list(g, os.path.join(directory, f"{label}.edgelist"))


def planted_partition_graph(
    n: int,
    p_in: float,
    p_out: float,
    rng: np.random.Generator,
    communities: int = 2,
) -> Graph:
    """Random graph with dense blocks on the diagonal of the community split."""
    if n < 2:
        raise ValueError(f"need at least two nodes, got {n}")
    if communities < 1 or communities > n:
        raise ValueError(f"bad community count {communities} for n={n}")
    for name, p in (("p_in", p_in), ("p_out", p_out)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {p}")
    membership = np.arange(n) % communities
    adj = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            p_edge = p_in if membership[i] == membership[j] else p_out
            if rng.random() < p_edge:
                adj[i, j] = adj[j, i] = 1.0
    return Graph(n, adj)


def planted_partition_corpus(
    count: int,
    n: int,
    p_in: float,
    p_out: float,
    seed: int,
    communities: int = 2,
    name: str = "planted",
) -> Dataset:
    """Seeded corpus of independent planted-partition graphs."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    graphs = []
    labels = []
    for i in range(count):
        rng = np.random.default_rng(derive_seed(seed, "corpus", name, i))
        graphs.append(planted_partition_graph(n, p_in, p_out, rng, communities))
        labels.append(f"{name}_{i:03d}")
    return Dataset(name=name, graphs=graphs, labels=labels)
