"""Variational graph autoencoder for link reconstruction.

Encoder: two GCN branches sharing the first-layer weights produce the
posterior mean and log-variance per node. Decoder: a two-layer FNN maps
latent codes to embeddings f(z); edge probability is
sigmoid(f(z_i) . f(z_j)), so the score matrix is symmetric by
construction.

Parameter names:

* ``enc_w0``      shared first GCN layer (n x hidden)
* ``enc_w1_mu``   mean head (hidden x latent)
* ``enc_w1_sig``  log-variance head (hidden x latent)
* ``dec_v0``      decoder FNN layer 1 (latent x hidden)
* ``dec_v1``      decoder FNN layer 2 (hidden x latent)

Only ``dec_v0``/``dec_v1`` are ever part of a released model.
"""
from __future__ import annotations

import dataclasses

import numpy as np

from .graphs import Graph, normalize_adjacency, one_hot_features
from .nn import (
    GradSet,
    ParamSet,
    fnn2_backward,
    fnn2_forward,
    gcn2_backward,
    gcn2_forward,
    glorot_init,
    sigmoid,
)

ENCODER_KEYS = ("enc_w0", "enc_w1_mu", "enc_w1_sig")
DECODER_KEYS = ("dec_v0", "dec_v1")

# |logvar| cap; keeps exp() finite when training runs off the rails
LOGVAR_CLAMP = 15.0


def init_gvae_params(
    rng: np.random.Generator, n: int, latent_dim: int, hidden_dim: int
) -> ParamSet:
    """Glorot-initialized parameter set; draw order is fixed for determinism."""
    return {
        "enc_w0": glorot_init(rng, n, hidden_dim),
        "enc_w1_mu": glorot_init(rng, hidden_dim, latent_dim),
        "enc_w1_sig": glorot_init(rng, hidden_dim, latent_dim),
        "dec_v0": glorot_init(rng, latent_dim, hidden_dim),
        "dec_v1": glorot_init(rng, hidden_dim, latent_dim),
    }


def encode(g: Graph, params: ParamSet, add_self_loops: bool = False):
    """Posterior (mu, logvar), each n x latent; logvar is clamped."""
    a_hat = normalize_adjacency(g, add_self_loops=add_self_loops)
    x = one_hot_features(g.n)
    mu, _ = gcn2_forward(a_hat, x, params["enc_w0"], params["enc_w1_mu"])
    logvar, _ = gcn2_forward(a_hat, x, params["enc_w0"], params["enc_w1_sig"])
    return mu, np.clip(logvar, -LOGVAR_CLAMP, LOGVAR_CLAMP)


def reparameterize(mu: np.ndarray, logvar: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """z = mu + exp(logvar / 2) * noise for a standard-normal noise draw."""
    if noise.shape != mu.shape:
        raise ValueError(f"noise shape {noise.shape} != mu shape {mu.shape}")
    return mu + np.exp(0.5 * logvar) * noise


def decode(z: np.ndarray, params: ParamSet) -> np.ndarray:
    """Edge probability matrix sigmoid(f(z) f(z)^T), diagonal included."""
    f, _ = fnn2_forward(z, params["dec_v0"], params["dec_v1"])
    return sigmoid(f @ f.T)


def auto_pos_weight(g: Graph) -> float:
    """Off-diagonal non-edge / edge ratio; 1.0 for an edgeless graph."""
    two_m = 2 * g.edge_count
    if two_m == 0:
        return 1.0
    return (g.n * (g.n - 1) - two_m) / two_m


def bce_rec_loss(
    a: np.ndarray,
    p: np.ndarray,
    pos_weight: float = 1.0,
    mask_diagonal: bool = False,
) -> tuple[float, np.ndarray]:
    """Weighted binary cross-entropy summed over all matrix entries.

    Returns (loss, dL/dP). P is clamped to [1e-12, 1 - 1e-12] before the
    logarithms; the gradient is taken at the clamped values.
    """
    a = np.asarray(a, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if a.shape != p.shape:
        raise ValueError(f"shape mismatch: a {a.shape} vs p {p.shape}")
    pc = np.clip(p, 1e-12, 1.0 - 1e-12)
    mask = np.ones_like(a)
    if mask_diagonal:
        np.fill_diagonal(mask, 0.0)
    terms = pos_weight * a * np.log(pc) + (1.0 - a) * np.log(1.0 - pc)
    loss = float(-(mask * terms).sum())
    d_p = -mask * (pos_weight * a / pc - (1.0 - a) / (1.0 - pc))
    return loss, d_p


def bce_grad_wrt_logits(
    a: np.ndarray, p: np.ndarray, pos_weight: float = 1.0, mask_diagonal: bool = True
) -> np.ndarray:
    """dL/dG for the BCE above with P = sigmoid(G), numerically stable.

    Direct form (1 - a) * p - pos_weight * a * (1 - p) avoids the
    0 * inf products the chain rule hits when P saturates.
    """
    d_g = (1.0 - a) * p - pos_weight * a * (1.0 - p)
    if mask_diagonal:
        d_g = d_g.copy()
        np.fill_diagonal(d_g, 0.0)
    return d_g


def kl_prior_loss(mu: np.ndarray, logvar: np.ndarray):
    """KL(q || N(0, I)) summed over nodes and dimensions, with gradients."""
    if mu.shape != logvar.shape:
        raise ValueError(f"shape mismatch: mu {mu.shape} vs logvar {logvar.shape}")
    ev = np.exp(logvar)
    loss = float(0.5 * np.sum(ev + mu * mu - 1.0 - logvar))
    d_mu = mu.copy()
    d_logvar = 0.5 * (ev - 1.0)
    return loss, d_mu, d_logvar


@dataclasses.dataclass
class GvaeForward:
    """One full forward pass with everything backward passes need."""

    a_hat: np.ndarray
    x: np.ndarray
    mu: np.ndarray
    logvar: np.ndarray
    lv_active: np.ndarray
    noise: np.ndarray
    z: np.ndarray
    f: np.ndarray
    logits: np.ndarray
    p: np.ndarray
    cache_mu: dict
    cache_sig: dict
    cache_dec: dict


def gvae_forward(
    g: Graph, params: ParamSet, noise: np.ndarray, add_self_loops: bool = False
) -> GvaeForward:
    a_hat = normalize_adjacency(g, add_self_loops=add_self_loops)
    x = one_hot_features(g.n)
    mu, cache_mu = gcn2_forward(a_hat, x, params["enc_w0"], params["enc_w1_mu"])
    lv_raw, cache_sig = gcn2_forward(a_hat, x, params["enc_w0"], params["enc_w1_sig"])
    lv_active = np.abs(lv_raw) < LOGVAR_CLAMP
    logvar = np.clip(lv_raw, -LOGVAR_CLAMP, LOGVAR_CLAMP)
    z = reparameterize(mu, logvar, noise)
    f, cache_dec = fnn2_forward(z, params["dec_v0"], params["dec_v1"])
    logits = f @ f.T
    p = sigmoid(logits)
    return GvaeForward(
        a_hat=a_hat,
        x=x,
        mu=mu,
        logvar=logvar,
        lv_active=lv_active,
        noise=noise,
        z=z,
        f=f,
        logits=logits,
        p=p,
        cache_mu=cache_mu,
        cache_sig=cache_sig,
        cache_dec=cache_dec,
    )


def decoder_backward(fwd: GvaeForward, d_logits: np.ndarray):
    """Gradients (d_v0, d_v1, d_z) from an upstream dL/d(logits).

    logits = F F^T, so dF = (dL + dL^T) F for any upstream dL.
    """
    d_f = (d_logits + d_logits.T) @ fwd.f
    d_v0, d_v1, d_z = fnn2_backward(fwd.cache_dec, d_f)
    return d_v0, d_v1, d_z


def gvae_backward(
    fwd: GvaeForward,
    d_logits: np.ndarray,
    d_mu_extra: np.ndarray | None = None,
    d_logvar_extra: np.ndarray | None = None,
) -> GradSet:
    """Full-parameter gradients from dL/d(logits) plus optional direct
    gradients on (mu, logvar), e.g. a KL term."""
    d_v0, d_v1, d_z = decoder_backward(fwd, d_logits)
    d_mu = d_z.copy()
    d_logvar = 0.5 * d_z * fwd.noise * np.exp(0.5 * fwd.logvar)
    if d_mu_extra is not None:
        d_mu += d_mu_extra
    if d_logvar_extra is not None:
        d_logvar += d_logvar_extra
    d_logvar = d_logvar * fwd.lv_active  # clamped entries pass no gradient
    d_w0_a, d_w1_mu, _ = gcn2_backward(fwd.cache_mu, d_mu)
    d_w0_b, d_w1_sig, _ = gcn2_backward(fwd.cache_sig, d_logvar)
    return {
        "enc_w0": d_w0_a + d_w0_b,
        "enc_w1_mu": d_w1_mu,
        "enc_w1_sig": d_w1_sig,
        "dec_v0": d_v0,
        "dec_v1": d_v1,
    }


def per_node_decoder_grad_stacks(fwd: GvaeForward, params: ParamSet, d_logits: np.ndarray):
    """Per-node decoder gradients for an upstream dL/d(logits), vectorized.

    Each off-diagonal logit (j, k) is attributed half to node j and half
    to node k; node i's gradient is the gradient of its attributed share.
    Returns (stack_v0, stack_v1) with shapes (n, *v0.shape), (n, *v1.shape);
    the stacks sum over nodes to the full decoder gradient exactly.
    """
    f = fwd.f
    cache = fwd.cache_dec
    z = fwd.z
    h = cache["h"]
    r = (cache["s"] > 0).astype(np.float64)
    v1 = params["dec_v1"]

    m = d_logits + d_logits.T
    a_rows = m @ f            # row i: upstream for f_i from node i's share
    b_rows = m @ h
    w_rows = f @ v1.T
    u_rows = a_rows @ v1.T

    stack_v1 = 0.5 * (
        np.einsum("ia,ib->iab", h, a_rows) + np.einsum("ia,ib->iab", b_rows, f)
    )
    term1 = np.einsum("ia,ib->iab", z, u_rows * r)
    term2 = np.einsum("pi,pa,pb->iab", m, z, r) * w_rows[:, None, :]
    stack_v0 = 0.5 * (term1 + term2)
    return stack_v0, stack_v1


def per_node_rec_grads(
    g: Graph,
    fwd: GvaeForward,
    params: ParamSet,
    pos_weight: float = 1.0,
    nodes=None,
) -> list[GradSet]:
    """Per-node gradients of the reconstruction loss over decoder params.

    The summed BCE decomposes node-wise by splitting every symmetric
    entry pair between its two endpoints, which coincides with charging
    node i the BCE of row i. Diagonal entries are excluded here (a node
    cannot self-link). Restricting to ``nodes`` slices that list.
    """
    d_logits = bce_grad_wrt_logits(g.adj, fwd.p, pos_weight, mask_diagonal=True)
    stack_v0, stack_v1 = per_node_decoder_grad_stacks(fwd, params, d_logits)
    idx = range(g.n) if nodes is None else [int(i) for i in nodes]
    return [{"dec_v0": stack_v0[i], "dec_v1": stack_v1[i]} for i in idx]
