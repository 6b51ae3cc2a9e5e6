"""Global structure statistics for undirected graphs.

Scalar statistics:

* ``lcc``  -- node count of the largest connected component.
* ``triangle_count`` -- trace(A^3) / 6.
* ``char_path_length`` -- mean shortest-path distance over connected
  node pairs; 0.0 when no two distinct nodes are connected.
* ``gini_degree`` -- Gini coefficient of the degree sequence,
  sum_ij |d_i - d_j| / (2 n sum_i d_i), 0.0 for an all-zero sequence.
* ``rede`` -- relative degree entropy,
  -sum_{d_i>0} (d_i / 2M) ln(d_i / 2M) / ln(n).

Vector statistics:

* ``degree_hist_50`` -- 50-bin degree histogram. Bin b (0-based index
  b-1) counts nodes of degree b for b = 1..49; the last bin counts
  degree >= 50. Degree-0 nodes are merged into the first bin so the
  vector always sums to n.
* ``motif_census`` -- counts of connected induced subgraphs on 3, 4 and
  5 nodes, classified up to isomorphism: 2 + 6 + 21 = 29 classes.
  Classes are ordered by (size, edge count, canonical bitmask); see
  motif_classes() and docs/motifs.md for the full table.
"""
from __future__ import annotations

import dataclasses
import functools
import itertools
from collections import deque

import numpy as np

from .graphs import Graph, degrees

DEGREE_HIST_BINS = 50
MOTIF_SIZES = (3, 4, 5)
MOTIF_CLASS_COUNT = 29


def lcc(g: Graph) -> int:
    """Size of the largest connected component (>= 1)."""
    seen = np.zeros(g.n, dtype=bool)
    neighbors = _neighbor_sets(g)
    best = 0
    for start in range(g.n):
        if seen[start]:
            continue
        size = 0
        queue = deque([start])
        seen[start] = True
        while queue:
            v = queue.popleft()
            size += 1
            for u in neighbors[v]:
                if not seen[u]:
                    seen[u] = True
                    queue.append(u)
        best = max(best, size)
    return best


def triangle_count(g: Graph) -> int:
    """Number of triangles, trace(A^3) / 6."""
    a = g.adj
    t = np.trace(a @ a @ a)
    return int(round(t / 6.0))


def char_path_length(g: Graph) -> float:
    """Mean shortest-path length over connected pairs of distinct nodes.

    Disconnected pairs are excluded rather than mapped to infinity; a
    graph with no edges has no connected pairs and returns 0.0.
    """
    neighbors = _neighbor_sets(g)
    total = 0
    pairs = 0
    for start in range(g.n):
        dist = _bfs_distances(neighbors, g.n, start)
        for v in range(g.n):
            if v != start and dist[v] >= 0:
                total += dist[v]
                pairs += 1
    if pairs == 0:
        return 0.0
    return total / pairs


def gini_degree(g: Graph) -> float:
    """Gini coefficient of the degree sequence; 0.0 if all degrees are 0."""
    d = degrees(g).astype(np.float64)
    s = d.sum()
    if s == 0:
        return 0.0
    diffs = np.abs(d[:, None] - d[None, :]).sum()
    return float(diffs / (2.0 * g.n * s))


def rede(g: Graph) -> float:
    """Relative degree entropy, normalized by ln(n); 0.0 for degenerate graphs."""
    if g.n < 2:
        return 0.0
    d = degrees(g).astype(np.float64)
    two_m = d.sum()
    if two_m == 0:
        return 0.0
    p = d[d > 0] / two_m
    return float(-(p * np.log(p)).sum() / np.log(g.n))


def degree_hist_50(g: Graph) -> np.ndarray:
    """50-bin degree histogram; see module docstring for bin semantics."""
    d = degrees(g)
    hist = np.zeros(DEGREE_HIST_BINS, dtype=np.int64)
    for deg in d:
        b = int(deg)
        if b < 1:
            b = 1  # degree-0 nodes merge into the first bin
        if b >= DEGREE_HIST_BINS:
            b = DEGREE_HIST_BINS
        hist[b - 1] += 1
    return hist


def cosine_sim(a, b) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


# ---------------------------------------------------------------------------
# Motif census machinery.
#
# Induced subgraphs on k nodes are encoded as bitmasks over the upper
# triangle, pair order (0,1),(0,2),...,(0,k-1),(1,2),...  The canonical
# form of a mask is the minimum over all k! node relabelings; a class is
# one canonical, connected mask. Lookup tables are tiny (2^10 masks at
# most) and built once per process.
# ---------------------------------------------------------------------------


def _pairs(k: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


@functools.lru_cache(maxsize=None)
def _perm_bit_maps(k: int) -> list[list[int]]:
    """For each permutation of k labels, where each pair-bit moves to."""
    pairs = _pairs(k)
    index = {p: b for b, p in enumerate(pairs)}
    maps = []
    for perm in itertools.permutations(range(k)):
        move = []
        for (i, j) in pairs:
            pi, pj = perm[i], perm[j]
            if pi > pj:
                pi, pj = pj, pi
            move.append(index[(pi, pj)])
        maps.append(move)
    return maps


def _mask_connected(mask: int, k: int) -> bool:
    pairs = _pairs(k)
    adj = [set() for _ in range(k)]
    for b, (i, j) in enumerate(pairs):
        if mask >> b & 1:
            adj[i].add(j)
            adj[j].add(i)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == k


@functools.lru_cache(maxsize=None)
def _motif_tables() -> tuple[dict[int, np.ndarray], list[tuple[int, int]]]:
    """Build (per-size mask -> global class id arrays, class list).

    Returns a dict {k: int32 array of length 2^C(k,2)} mapping each mask
    to a global class index (-1 for disconnected masks) and the ordered
    list of (size, canonical mask) class descriptors.
    """
    classes: list[tuple[int, int]] = []
    lookup: dict[int, np.ndarray] = {}
    for k in MOTIF_SIZES:
        nbits = k * (k - 1) // 2
        maps = _perm_bit_maps(k)
        canon = np.zeros(1 << nbits, dtype=np.int64)
        for mask in range(1 << nbits):
            best = mask
            for move in maps:
                m = 0
                rest = mask
                while rest:
                    b = (rest & -rest).bit_length() - 1
                    m |= 1 << move[b]
                    rest &= rest - 1
                if m < best:
                    best = m
            canon[mask] = best
        connected = sorted(
            {int(canon[m]) for m in range(1 << nbits) if _mask_connected(m, k)},
            key=lambda c: (bin(c).count("1"), c),
        )
        base = len(classes)
        class_of_canon = {c: base + i for i, c in enumerate(connected)}
        table = np.full(1 << nbits, -1, dtype=np.int32)
        for mask in range(1 << nbits):
            cid = class_of_canon.get(int(canon[mask]))
            if cid is not None and _mask_connected(mask, k):
                table[mask] = cid
        classes.extend((k, c) for c in connected)
        lookup[k] = table
    if len(classes) != MOTIF_CLASS_COUNT:
        raise AssertionError(f"expected {MOTIF_CLASS_COUNT} classes, got {len(classes)}")
    return lookup, classes


def motif_classes() -> list[dict]:
    """Ordered class descriptors: index, size, edge count, bitmask, edges."""
    _, classes = _motif_tables()
    out = []
    for idx, (k, mask) in enumerate(classes):
        pairs = _pairs(k)
        edges = [pairs[b] for b in range(len(pairs)) if mask >> b & 1]
        out.append(
            {
                "index": idx,
                "size": k,
                "edge_count": len(edges),
                "bitmask": mask,
                "edges": edges,
            }
        )
    return out


def _neighbor_sets(g: Graph) -> list[set[int]]:
    return [set(np.nonzero(g.adj[v])[0].tolist()) for v in range(g.n)]


def _esu_subsets(neighbors: list[set[int]], n: int, k: int):
    """Enumerate each connected induced k-subset exactly once (ESU)."""

    def extend(sub: list[int], ext: set[int], root: int):
        if len(sub) == k:
            yield tuple(sub)
            return
        while ext:
            w = ext.pop()
            excl = {
                u
                for u in neighbors[w]
                if u > root and u not in sub and all(u not in neighbors[s] for s in sub)
            }
            yield from extend(sub + [w], ext | excl, root)

    for v in range(n):
        ext0 = {u for u in neighbors[v] if u > v}
        yield from extend([v], ext0, v)


def motif_census(g: Graph) -> np.ndarray:
    """29-vector of connected induced subgraph counts on 3..5 nodes."""
    lookup, _ = _motif_tables()
    counts = np.zeros(MOTIF_CLASS_COUNT, dtype=np.int64)
    neighbors = _neighbor_sets(g)
    adj = g.adj
    for k in MOTIF_SIZES:
        if g.n < k:
            continue
        table = lookup[k]
        pairs = _pairs(k)
        for subset in _esu_subsets(neighbors, g.n, k):
            nodes = sorted(subset)
            mask = 0
            for b, (i, j) in enumerate(pairs):
                if adj[nodes[i], nodes[j]] != 0.0:
                    mask |= 1 << b
            cid = table[mask]
            if cid < 0:
                raise AssertionError("ESU produced a disconnected subset")
            counts[cid] += 1
    return counts


@dataclasses.dataclass(frozen=True)
class GraphStats:
    """Full statistics report for one graph."""

    n: int
    edge_count: int
    lcc: int
    triangle_count: int
    char_path_length: float
    gini_degree: float
    rede: float
    degree_hist: np.ndarray
    motif_census: np.ndarray

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edge_count": self.edge_count,
            "lcc": self.lcc,
            "triangle_count": self.triangle_count,
            "char_path_length": self.char_path_length,
            "gini_degree": self.gini_degree,
            "rede": self.rede,
            "degree_hist": self.degree_hist.tolist(),
            "motif_census": self.motif_census.tolist(),
        }


def compute_stats(g: Graph) -> GraphStats:
    return GraphStats(
        n=g.n,
        edge_count=g.edge_count,
        lcc=lcc(g),
        triangle_count=triangle_count(g),
        char_path_length=char_path_length(g),
        gini_degree=gini_degree(g),
        rede=rede(g),
        degree_hist=degree_hist_50(g),
        motif_census=motif_census(g),
    )


def _bfs_distances(neighbors: list[set[int]], n: int, start: int) -> list[int]:
    dist = [-1] * n
    dist[start] = 0
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for u in neighbors[v]:
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist
