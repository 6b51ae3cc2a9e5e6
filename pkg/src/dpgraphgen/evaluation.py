"""Utility and privacy evaluation of generated graphs.

Utility: absolute gaps on scalar structure statistics plus cosine
similarity of the degree histogram and motif census, averaged over a
set of generated graphs.

Privacy: a link-reconstruction probe. Hide a fraction of the original
edges, train on the rest, generate, align generated nodes to original
nodes by sorted degree, then score every node pair absent from the
training graph by its generated edge probability and predict the top h
pairs (h = number of hidden edges). The probe's accuracy is the hit
fraction; random guessing scores h / #candidates.
"""
from __future__ import annotations

import dataclasses

import numpy as np
from scipy.stats import rankdata

from .graphs import Graph, degrees
from .generation import GeneratorHead, sample_graph_with_probs
from .gvae import decode, encode
from .nn import ParamSet
from .seeding import derive_seed
from .stats import (
    char_path_length,
    cosine_sim,
    degree_hist_50,
    gini_degree,
    lcc,
    motif_census,
    rede,
    triangle_count,
)

GAP_KEYS = ("lcc", "triangle_count", "char_path_length", "gini_degree", "rede")

_SCALARS = {
    "lcc": lcc,
    "triangle_count": triangle_count,
    "char_path_length": char_path_length,
    "gini_degree": gini_degree,
    "rede": rede,
}


def stats_gap(original: Graph, generated: list[Graph]) -> dict:
    """Mean absolute gap per scalar statistic, original vs each sample."""
    if not generated:
        raise ValueError("no generated graphs to compare")
    gaps = {}
    for name, fn in _SCALARS.items():
        ref = float(fn(original))
        gaps[name] = float(np.mean([abs(float(fn(g)) - ref) for g in generated]))
    return gaps


def similarity_scores(original: Graph, generated: list[Graph]) -> dict:
    """Mean cosine similarity of degree histogram and motif census."""
    if not generated:
        raise ValueError("no generated graphs to compare")
    deg_ref = degree_hist_50(original)
    motif_ref = motif_census(original)
    deg = float(np.mean([cosine_sim(deg_ref, degree_hist_50(g)) for g in generated]))
    motif = float(np.mean([cosine_sim(motif_ref, motif_census(g)) for g in generated]))
    return {"degree_cosine": deg, "motif_cosine": motif}


def reconstruction_auc(g: Graph, params: ParamSet, add_self_loops: bool = False) -> float:
    """AUC of decoded posterior-mean scores against the true edges.

    Scores all off-diagonal pairs from decode(encode-mean); ties get
    average rank (Mann-Whitney form).
    """
    mu, _ = encode(g, params, add_self_loops=add_self_loops)
    p = decode(mu, params)
    iu, ju = np.triu_indices(g.n, k=1)
    scores = p[iu, ju]
    labels = g.adj[iu, ju] > 0
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both edges and non-edges")
    ranks = rankdata(scores)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def split_edges(g: Graph, train_fraction: float, rng: np.random.Generator):
    """Random edge split into (train graph, held-out edge list).

    Keeps floor(train_fraction * M) edges for training, holds out the
    remainder. Both sides must be non-empty.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    edges = g.edges()
    m = len(edges)
    n_train = int(train_fraction * m)
    if n_train < 1 or n_train >= m:
        raise ValueError(
            f"split of {m} edges at fraction {train_fraction} leaves an empty side"
        )
    order = rng.permutation(m)
    train_edges = [edges[i] for i in order[:n_train]]
    heldout = sorted(edges[i] for i in order[n_train:])
    return Graph.from_edges(g.n, train_edges), heldout


def align_by_degree(original: Graph, generated: Graph) -> np.ndarray:
    """Rank-match nodes by degree: perm[generated node] = original node.

    Both node sets sort by (degree desc, index asc); equal-sized graphs
    only.
    """
    if original.n != generated.n:
        raise ValueError(f"node count mismatch: {original.n} vs {generated.n}")
    n = original.n
    orig_order = np.lexsort((np.arange(n), -degrees(original)))
    gen_order = np.lexsort((np.arange(n), -degrees(generated)))
    perm = np.empty(n, dtype=np.int64)
    perm[gen_order] = orig_order
    return perm


@dataclasses.dataclass
class ProbeResult:
    accuracy_mean: float
    accuracy_per_fold: list[float]
    heldout_count: int
    candidate_count: int

    @property
    def random_baseline(self) -> float:
        return self.heldout_count / self.candidate_count

    def to_dict(self) -> dict:
        return {
            "accuracy_mean": self.accuracy_mean,
            "accuracy_per_fold": self.accuracy_per_fold,
            "heldout_count": self.heldout_count,
            "candidate_count": self.candidate_count,
            "random_baseline": self.random_baseline,
        }


def link_privacy_probe(
    original: Graph,
    train_fn,
    cfg,
    k_folds: int = 5,
    seed: int = 0,
    mode: str = "topm",
    train_fraction: float = 0.8,
) -> ProbeResult:
    """Edge-recovery attack accuracy, averaged over k random splits.

    train_fn(graph, cfg) must return a Checkpoint; each fold gets its
    own derived training seed so folds are independent but the whole
    probe is reproducible from one seed.
    """
    if k_folds < 1:
        raise ValueError(f"k_folds must be positive, got {k_folds}")
    n = original.n
    accs = []
    h_last = cand_last = 0
    for fold in range(k_folds):
        split_rng = np.random.default_rng(derive_seed(seed, "split", fold))
        train_g, heldout = split_edges(original, train_fraction, split_rng)
        fold_cfg = dataclasses.replace(cfg, seed=derive_seed(seed, "train", fold))
        ckpt = train_fn(train_g, fold_cfg)
        gen = GeneratorHead.from_checkpoint(ckpt)
        gen_rng = np.random.default_rng(derive_seed(seed, "generate", fold))
        sampled, p = sample_graph_with_probs(gen, gen_rng, n=n, mode=mode)
        perm = align_by_degree(original, sampled)
        # carry generated probabilities into original index space
        scores = np.zeros((n, n))
        scores[np.ix_(perm, perm)] = p
        iu, ju = np.triu_indices(n, k=1)
        free = train_g.adj[iu, ju] == 0
        cand_i, cand_j = iu[free], ju[free]
        cand_scores = np.maximum(scores[cand_i, cand_j], scores[cand_j, cand_i])
        h = len(heldout)
        order = np.lexsort((cand_j, cand_i, -cand_scores))
        picked = {(int(cand_i[k]), int(cand_j[k])) for k in order[:h]}
        hits = len(picked & set(heldout))
        accs.append(hits / h)
        h_last, cand_last = h, int(free.sum())
    return ProbeResult(
        accuracy_mean=float(np.mean(accs)),
        accuracy_per_fold=[float(a) for a in accs],
        heldout_count=h_last,
        candidate_count=cand_last,
    )
