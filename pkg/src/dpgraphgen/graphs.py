"""Undirected simple graphs stored as dense 0/1 adjacency matrices.

Dense float64 matrices keep every downstream consumer (spectral-style
normalization, matmul-heavy models, statistics) on one representation.
Graphs at the intended scale are small, so O(n^2) storage is a non-issue.
"""
from __future__ import annotations

import dataclasses

import numpy as np


class EdgeListFormatError(ValueError):
    """Raised when edge-list text does not follow the expected format."""


@dataclasses.dataclass(frozen=True)
class Graph:
    """Immutable simple graph: no self-loops, no multi-edges, symmetric."""

    n: int
    adj: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"graph needs at least one node, got n={self.n}")
        a = np.asarray(self.adj, dtype=np.float64)
        if a.shape != (self.n, self.n):
            raise ValueError(f"adjacency shape {a.shape} does not match n={self.n}")
        if not np.all((a == 0.0) | (a == 1.0)):
            raise ValueError("adjacency entries must be 0 or 1")
        if np.any(np.diagonal(a) != 0.0):
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "adj", a)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from an iterable of (u, v) pairs; duplicates collapse."""
        a = np.zeros((n, n), dtype=np.float64)
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            a[u, v] = 1.0
            a[v, u] = 1.0
        return cls(n, a)

    @property
    def edge_count(self) -> int:
        return int(self.adj.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Edges as sorted (u, v) pairs with u < v."""
        iu, ju = np.nonzero(np.triu(self.adj, k=1))
        return [(int(u), int(v)) for u, v in zip(iu, ju)]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u, v] != 0.0)


def degrees(g: Graph) -> np.ndarray:
    """Node degrees as an int64 vector."""
    return g.adj.sum(axis=1).astype(np.int64)


def one_hot_features(n: int) -> np.ndarray:
    """Identity feature matrix for graphs with no node attributes."""
    return np.eye(n, dtype=np.float64)


def normalize_dense(a: np.ndarray, add_self_loops: bool = False) -> np.ndarray:
    """Symmetric degree normalization D^{-1/2} A D^{-1/2} for a dense matrix.

    Accepts soft (non-binary, non-negative) inputs; row sums play the role
    of degrees. Zero-sum rows map to zero rows rather than NaN. The scaling
    is applied through outer(s, s) so a symmetric input yields a bitwise
    symmetric output (float multiply commutes).
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if add_self_loops:
        a = a + np.eye(a.shape[0])
    d = a.sum(axis=1)
    s = np.zeros_like(d)
    np.divide(1.0, np.sqrt(d), out=s, where=d > 0)
    return a * np.outer(s, s)


def normalize_adjacency(g: Graph, add_self_loops: bool = False) -> np.ndarray:
    """Normalized adjacency of a graph; see normalize_dense."""
    return normalize_dense(g.adj, add_self_loops=add_self_loops)


def parse_edge_list(text: str) -> Graph:
    """Parse the plain-text edge-list format.

    First significant line is ``n <count>``; each following line is
    ``<u> <v>`` with 0-based endpoints. ``#`` starts a comment. Duplicate
    edges (either orientation) collapse silently; self-loops are an error.
    """
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise EdgeListFormatError(
                    f"line {lineno}: expected header 'n <count>', got {raw!r}"
                )
            try:
                n = int(parts[1])
            except ValueError:
                raise EdgeListFormatError(f"line {lineno}: bad node count {parts[1]!r}")
            if n < 1:
                raise EdgeListFormatError(f"line {lineno}: node count must be positive")
            continue
        if len(parts) != 2:
            raise EdgeListFormatError(f"line {lineno}: expected '<u> <v>', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListFormatError(f"line {lineno}: non-integer endpoint in {raw!r}")
        if u == v:
            raise EdgeListFormatError(f"line {lineno}: self-loop at node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise EdgeListFormatError(
                f"line {lineno}: endpoint out of range for n={n}: {raw!r}"
            )
        edges.append((u, v))
    if n is None:
        raise EdgeListFormatError("empty edge list: missing 'n <count>' header")
    return Graph.from_edges(n, edges)


def format_edge_list(g: Graph) -> str:
    """Serialize to the canonical text form: header, then sorted edges."""
    lines = [f"n {g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"
