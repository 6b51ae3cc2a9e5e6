"""Sampling synthetic graphs from a trained (possibly released) model.

Generation needs only the decoder weights: latent codes are drawn from
the standard-normal prior, decoded to an edge probability matrix, and
binarized. Holding the generator head as its own type makes it
structurally impossible to feed encoder or discriminator weights into
sampling.

Binarization modes:

* ``topm``      keep the M most probable node pairs (default; M
                defaults to the training graph's edge count).
* ``threshold`` keep pairs with probability strictly above 0.5.
* ``bernoulli`` draw each pair independently.

Self-loops are never generated. Ties in topm break deterministically by
(probability desc, i asc, j asc).
"""
from __future__ import annotations

import dataclasses

import numpy as np

from .graphs import Graph
from .nn import fnn2_forward, sigmoid
from .training import Checkpoint

MODES = ("topm", "threshold", "bernoulli")


@dataclasses.dataclass(frozen=True)
class GeneratorHead:
    """Decoder weights plus the metadata sampling needs."""

    v0: np.ndarray
    v1: np.ndarray
    latent_dim: int
    n_nodes: int
    edge_count: int

    @classmethod
    def from_checkpoint(cls, ckpt: Checkpoint) -> "GeneratorHead":
        return cls(
            v0=ckpt.params["dec_v0"],
            v1=ckpt.params["dec_v1"],
            latent_dim=ckpt.latent_dim,
            n_nodes=ckpt.n_nodes,
            edge_count=ckpt.edge_count,
        )


def edge_probabilities(gen: GeneratorHead, z: np.ndarray) -> np.ndarray:
    """Symmetric probability matrix with a zero diagonal."""
    f, _ = fnn2_forward(z, gen.v0, gen.v1)
    p = sigmoid(f @ f.T)
    np.fill_diagonal(p, 0.0)
    return p


def _upper_indices(n: int):
    return np.triu_indices(n, k=1)


def binarize(p: np.ndarray, mode: str, rng: np.random.Generator | None, m: int | None):
    """Turn a probability matrix into a Graph under the given mode."""
    n = p.shape[0]
    iu, ju = _upper_indices(n)
    vals = p[iu, ju]
    if mode == "threshold":
        keep = vals > 0.5
    elif mode == "bernoulli":
        if rng is None:
            raise ValueError("bernoulli mode needs an rng")
        keep = rng.random(vals.shape[0]) < vals
    elif mode == "topm":
        if m is None:
            raise ValueError("topm mode needs an edge count")
        if m > vals.shape[0]:
            raise ValueError(
                f"cannot place {m} edges among {vals.shape[0]} node pairs"
            )
        keep = np.zeros(vals.shape[0], dtype=bool)
        order = np.lexsort((ju, iu, -vals))
        keep[order[:m]] = True
    else:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    adj = np.zeros((n, n))
    adj[iu[keep], ju[keep]] = 1.0
    adj[ju[keep], iu[keep]] = 1.0
    return Graph(n, adj)


def sample_graph_with_probs(
    gen: GeneratorHead,
    rng: np.random.Generator,
    n: int | None = None,
    mode: str = "topm",
    m: int | None = None,
):
    """One synthetic graph plus the probability matrix behind it."""
    n = gen.n_nodes if n is None else int(n)
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    z = rng.standard_normal((n, gen.latent_dim))
    p = edge_probabilities(gen, z)
    if mode == "topm" and m is None:
        m = gen.edge_count
    return binarize(p, mode, rng, m), p


def sample_graph(
    gen: GeneratorHead,
    rng: np.random.Generator,
    n: int | None = None,
    mode: str = "topm",
    m: int | None = None,
) -> Graph:
    graph, _ = sample_graph_with_probs(gen, rng, n=n, mode=mode, m=m)
    return graph


def sample_many(
    gen: GeneratorHead,
    rng: np.random.Generator,
    count: int,
    n: int | None = None,
    mode: str = "topm",
    m: int | None = None,
) -> list[Graph]:
    """count independent samples from one shared stream."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    return [sample_graph(gen, rng, n=n, mode=mode, m=m) for _ in range(count)]
