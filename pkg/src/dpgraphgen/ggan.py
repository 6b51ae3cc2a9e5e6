"""Adversarial add-on for the graph autoencoder.

A graph-level discriminator scores a dense (possibly soft) adjacency
matrix: the matrix is degree-normalized, run through a two-layer GCN
with identity features, sum-pooled over nodes into a graph feature
vector, and mapped by a two-layer FNN to a logistic score in (0, 1).

The pooled feature vector doubles as the target of the feature
reconstruction loss ||pool(A) - pool(A')||_2^2, the GGAN's replacement
for entry-wise BCE.

Parameter names: ``disc_u0``, ``disc_u1`` (GCN), ``disc_f0``,
``disc_f1`` (FNN head). Discriminator parameters are never released.

Backward passes propagate through the degree normalization itself: with
A_hat_jk = s_j s_k A_jk and s = rowsum(A)^{-1/2}, the input gradient
picks up rank-one correction terms from ds/dA (zero-sum rows stay zero).
"""
from __future__ import annotations

import numpy as np

from .graphs import normalize_dense
from .nn import GradSet, ParamSet, glorot_init, relu, sigmoid

DISC_KEYS = ("disc_u0", "disc_u1", "disc_f0", "disc_f1")

_SCORE_EPS = 1e-12


def init_disc_params(
    rng: np.random.Generator, n: int, hidden_dim: int, feat_dim: int, fnn_hidden: int
) -> ParamSet:
    return {
        "disc_u0": glorot_init(rng, n, hidden_dim),
        "disc_u1": glorot_init(rng, hidden_dim, feat_dim),
        "disc_f0": glorot_init(rng, feat_dim, fnn_hidden),
        "disc_f1": glorot_init(rng, fnn_hidden, 1),
    }


def discriminate(matrix: np.ndarray, params: ParamSet):
    """Score a dense adjacency-like matrix.

    Returns (score, pooled, cache): score in (0, 1), pooled the graph
    feature vector before the FNN head.
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] != params["disc_u0"].shape[0]:
        raise ValueError(
            f"matrix size {a.shape[0]} != discriminator size "
            f"{params['disc_u0'].shape[0]}"
        )
    d = a.sum(axis=1)
    s = np.zeros_like(d)
    pos = d > 0
    s[pos] = 1.0 / np.sqrt(d[pos])
    # row scaling first: A_jk <= d_j keeps intermediates bounded even
    # when two tiny rows meet (outer(s, s) alone can overflow)
    a_hat = (a * s[:, None]) * s[None, :]
    s1 = a_hat @ params["disc_u0"]
    h1 = relu(s1)
    h2 = a_hat @ h1
    node_feats = h2 @ params["disc_u1"]
    pooled = node_feats.sum(axis=0)
    q0 = pooled @ params["disc_f0"]
    hq = relu(q0)
    logit = float(hq @ params["disc_f1"][:, 0])
    score = float(sigmoid(np.asarray(logit)))
    cache = {
        "a": a,
        "d": d,
        "s": s,
        "a_hat": a_hat,
        "s1": s1,
        "h1": h1,
        "h2": h2,
        "pooled": pooled,
        "q0": q0,
        "hq": hq,
        "score": score,
        "params": params,
    }
    return score, pooled, cache


def disc_backward(
    cache: dict,
    d_score: float = 0.0,
    d_pooled: np.ndarray | None = None,
    wrt_input: bool = False,
):
    """Backward through discriminate.

    Upstream signal may enter at the score, at the pooled vector, or
    both. Returns (param grad set, input gradient or None). When
    wrt_input is set the gradient w.r.t. the raw input matrix is
    computed with the discriminator parameters held constant (the
    parameter grads are still returned; callers ignore what they do
    not need).
    """
    params = cache["params"]
    n = cache["a"].shape[0]
    pooled = cache["pooled"]

    d_logit = d_score * cache["score"] * (1.0 - cache["score"])
    d_f1 = (cache["hq"] * d_logit)[:, None]
    d_hq = d_logit * params["disc_f1"][:, 0]
    d_q0 = d_hq * (cache["q0"] > 0)
    d_f0 = np.outer(pooled, d_q0)
    d_pool = d_q0 @ params["disc_f0"].T
    if d_pooled is not None:
        d_pool = d_pool + d_pooled

    d_node_feats = np.broadcast_to(d_pool, (n, d_pool.shape[0]))
    d_u1 = cache["h2"].T @ d_node_feats
    d_h2 = d_node_feats @ params["disc_u1"].T
    a_hat = cache["a_hat"]
    d_a_hat = d_h2 @ cache["h1"].T
    d_h1 = a_hat.T @ d_h2
    d_s1 = d_h1 * (cache["s1"] > 0)
    d_u0 = a_hat.T @ d_s1
    d_a_hat = d_a_hat + d_s1 @ params["disc_u0"].T

    grads: GradSet = {
        "disc_u0": d_u0,
        "disc_u1": d_u1,
        "disc_f0": d_f0,
        "disc_f1": d_f1,
    }
    if not wrt_input:
        return grads, None

    # dA from dA_hat: direct term s_a s_b dA_hat_ab plus the degree
    # terms through s = rowsum(A)^{-1/2}. Every s_j depends only on row
    # j of A, so both correction terms broadcast across row a: changing
    # A_ab moves s_a, which scales row a and column a of A_hat.
    a = cache["a"]
    s = cache["s"]
    w = d_a_hat * a
    dsd = -0.5 * s * s * s  # ds_a/dd_a = -d^{-3/2}/2; zero rows stay zero
    t = dsd * (w @ s + w.T @ s)
    d_in = (d_a_hat * s[:, None]) * s[None, :] + t[:, None]
    return grads, d_in


def gan_loss(score_real: float, score_fake: float):
    """log(D(A)) + log(1 - D(A')) and its gradients w.r.t. both scores."""
    cr = min(max(score_real, _SCORE_EPS), 1.0 - _SCORE_EPS)
    cf = min(max(score_fake, _SCORE_EPS), 1.0 - _SCORE_EPS)
    loss = float(np.log(cr) + np.log(1.0 - cf))
    d_real = 1.0 / cr
    d_fake = -1.0 / (1.0 - cf)
    return loss, d_real, d_fake


def feature_rec_loss(a: np.ndarray, p: np.ndarray, params: ParamSet):
    """Squared distance between pooled features of A and P.

    Returns (loss, dL/dP); the gradient flows through the P branch only,
    with discriminator parameters treated as constants.
    """
    _, pooled_a, _ = discriminate(a, params)
    _, pooled_p, cache_p = discriminate(p, params)
    diff = pooled_a - pooled_p
    loss = float(diff @ diff)
    _, d_p = disc_backward(cache_p, d_pooled=-2.0 * diff, wrt_input=True)
    return loss, d_p
