"""Training loops for the plain and adversarial graph autoencoders.

Conventions shared by both trainers:

* All randomness flows from TrainConfig.seed through one
  numpy Generator; the per-step draw order is fixed (node batch, then
  reparameterization noise, then any privacy noise), so runs are
  bit-reproducible.
* Encoder (and discriminator) updates use exact full gradients of the
  per-node-mean objective with momentum SGD.
* Decoder/generator updates always go through per-node gradient
  contributions averaged over the sampled node batch: privatized via
  dp_gradient when a DpConfig is present, plain average_grads otherwise.
  The two paths share their summation code, so sigma = 0 with a large
  clip reproduces the non-private step exactly.
* Loss traces record per-node-mean values once per epoch (last step).
"""
from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from . import ggan as ggan_mod
from .dp import (
    DpConfig,
    PrivacyReport,
    PrivacyValidityError,
    average_grads,
    calibrate_sigma,
    clip_schedule,
    dp_gradient,
)
from .graphs import Graph
from .gvae import (
    DECODER_KEYS,
    ENCODER_KEYS,
    auto_pos_weight,
    bce_grad_wrt_logits,
    bce_rec_loss,
    gvae_backward,
    gvae_forward,
    init_gvae_params,
    kl_prior_loss,
    per_node_decoder_grad_stacks,
)
from .nn import ParamSet, params_from_jsonable, params_to_jsonable

CHECKPOINT_FORMAT = "dpgraphgen-checkpoint"
CHECKPOINT_VERSION = 1

GENERATOR_KEYS = DECODER_KEYS

# lower bound on soft adjacency entries fed to the discriminator
_P_FLOOR = 1e-6


class TrainingDivergedError(RuntimeError):
    """A loss became non-finite; the run is unusable."""


@dataclasses.dataclass
class TrainConfig:
    epochs: int = 200
    steps_per_epoch: int = 1
    batch_nodes: int = 0  # 0 means all nodes
    lr_encoder: float = 0.01
    lr_generator: float = 0.01
    lr_discriminator: float = 0.01
    momentum: float = 0.9
    lambda1: float = 1.0
    lambda2: float = 0.1
    latent_dim: int = 16
    hidden_dim: int = 32
    disc_feat_dim: int = 16
    disc_fnn_hidden: int = 16
    pos_weight: float | None = None
    add_self_loops: bool = False
    seed: int = 0
    dp: DpConfig | None = None

    def __post_init__(self):
        if self.epochs < 1 or self.steps_per_epoch < 1:
            raise ValueError("epochs and steps_per_epoch must be at least 1")
        if self.batch_nodes < 0:
            raise ValueError("batch_nodes must be non-negative")
        for name in ("lr_encoder", "lr_generator", "lr_discriminator"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        for name in ("lambda1", "lambda2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("latent_dim", "hidden_dim", "disc_feat_dim", "disc_fnn_hidden"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    def effective_batch(self, n: int) -> int:
        if self.batch_nodes <= 0 or self.batch_nodes >= n:
            return n
        return self.batch_nodes


def config_to_dict(cfg: TrainConfig) -> dict:
    d = dataclasses.asdict(cfg)
    return d


def config_from_dict(obj: dict) -> TrainConfig:
    obj = dict(obj)
    dp = obj.get("dp")
    if dp is not None:
        obj["dp"] = DpConfig(**dp)
    return TrainConfig(**obj)


@dataclasses.dataclass
class Checkpoint:
    """A trained model plus everything needed to audit or resume it."""

    model: str  # "gvae" | "ggan"
    n_nodes: int
    edge_count: int
    latent_dim: int
    config: TrainConfig
    params: ParamSet
    privacy: PrivacyReport | None
    loss_trace: list[dict]
    released: bool = False


def release(ckpt: Checkpoint) -> Checkpoint:
    """Strip everything but the generator; safe to hand out."""
    params = {k: ckpt.params[k].copy() for k in GENERATOR_KEYS}
    return dataclasses.replace(ckpt, params=params, released=True)


def checkpoint_to_dict(ckpt: Checkpoint) -> dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "model": ckpt.model,
        "released": ckpt.released,
        "n_nodes": ckpt.n_nodes,
        "edge_count": ckpt.edge_count,
        "latent_dim": ckpt.latent_dim,
        "config": config_to_dict(ckpt.config),
        "privacy": ckpt.privacy.to_dict() if ckpt.privacy else None,
        "loss_trace": ckpt.loss_trace,
        "params": params_to_jsonable(ckpt.params),
    }


def checkpoint_from_dict(obj: dict) -> Checkpoint:
    if not isinstance(obj, dict) or obj.get("format") != CHECKPOINT_FORMAT:
        raise ValueError("not a checkpoint document")
    if obj.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {obj.get('version')!r}")
    privacy = obj.get("privacy")
    return Checkpoint(
        model=obj["model"],
        n_nodes=int(obj["n_nodes"]),
        edge_count=int(obj["edge_count"]),
        latent_dim=int(obj["latent_dim"]),
        config=config_from_dict(obj["config"]),
        params=params_from_jsonable(obj["params"]),
        privacy=PrivacyReport.from_dict(privacy) if privacy else None,
        loss_trace=list(obj.get("loss_trace", [])),
        released=bool(obj.get("released", False)),
    )


def save_checkpoint(ckpt: Checkpoint, path):
    with open(path, "w") as fh:
        json.dump(checkpoint_to_dict(ckpt), fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> Checkpoint:
    with open(path) as fh:
        return checkpoint_from_dict(json.load(fh))


def sample_node_batch(n: int, b: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform without-replacement node sample, returned sorted.

    b <= 0 or b >= n selects every node (and consumes no randomness).
    """
    if b <= 0 or b >= n:
        return np.arange(n)
    return np.sort(rng.choice(n, size=b, replace=False))


def sgd_step(params: ParamSet, grads, lr: float) -> ParamSet:
    """Pure single SGD step over the keys present in grads."""
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    out = dict(params)
    for k, g in grads.items():
        out[k] = params[k] - lr * g
    return out


class _Momentum:
    """Classic momentum buffer over a fixed key subset, updating in place."""

    def __init__(self, momentum: float, keys):
        self.momentum = momentum
        self.keys = tuple(keys)
        self.velocity = None

    def step(self, params: ParamSet, grads, lr: float):
        if self.velocity is None:
            self.velocity = {k: np.zeros_like(params[k]) for k in self.keys}
        for k in self.keys:
            self.velocity[k] = self.momentum * self.velocity[k] + grads[k]
            params[k] = params[k] - lr * self.velocity[k]


def _prepare_privacy(cfg: TrainConfig, n: int) -> tuple[DpConfig, PrivacyReport] | None:
    if cfg.dp is None:
        return None
    b = cfg.effective_batch(n)
    dp_cfg = dataclasses.replace(
        cfg.dp, q=b / n, t_max=cfg.epochs * cfg.steps_per_epoch
    )
    cal = calibrate_sigma(dp_cfg)
    if not cal.valid and not dp_cfg.override_validity:
        raise PrivacyValidityError(cal.message)
    dp_cfg = dataclasses.replace(dp_cfg, sigma=cal.sigma)
    report = PrivacyReport(
        epsilon=dp_cfg.epsilon,
        delta=dp_cfg.delta,
        sigma=cal.sigma,
        steps=0,
        q=dp_cfg.q,
        t_max=dp_cfg.t_max,
        c0=dp_cfg.c0,
        c1=cal.c1,
        valid=cal.valid,
        message=cal.message,
    )
    return dp_cfg, report


def _check_finite(name: str, value: float, epoch: int):
    if not math.isfinite(value):
        raise TrainingDivergedError(f"{name} became {value} at epoch {epoch}")


def _generator_update(
    params: ParamSet,
    stacks,
    batch: np.ndarray,
    dp_cfg: DpConfig | None,
    report: PrivacyReport | None,
    c_epoch: float | None,
    n: int,
    lr: float,
    rng: np.random.Generator,
):
    """Shared decoder/generator step: per-node mean, privatized if asked."""
    stack_v0, stack_v1 = stacks
    per_node = [{"dec_v0": stack_v0[i], "dec_v1": stack_v1[i]} for i in batch]
    if dp_cfg is not None:
        divisor = len(batch) if dp_cfg.mean_divisor == "batch" else n
        g_tilde = dp_gradient(per_node, c_epoch, dp_cfg.sigma, divisor, rng)
        report.steps += 1
    else:
        g_tilde = average_grads(per_node, len(batch))
    for k in GENERATOR_KEYS:
        params[k] = params[k] - lr * g_tilde[k]


def train_gvae(g: Graph, cfg: TrainConfig) -> Checkpoint:
    """Variational trainer: BCE reconstruction + KL prior.

    Encoder descends (L_rec + lambda1 * KL) / n with momentum; the
    decoder follows the per-node averaged reconstruction gradient,
    privatized when cfg.dp is set.
    """
    n = g.n
    rng = np.random.default_rng(cfg.seed)
    params = init_gvae_params(rng, n, cfg.latent_dim, cfg.hidden_dim)
    pos_w = cfg.pos_weight if cfg.pos_weight is not None else auto_pos_weight(g)
    privacy = _prepare_privacy(cfg, n)
    dp_cfg, report = privacy if privacy else (None, None)
    enc_opt = _Momentum(cfg.momentum, ENCODER_KEYS)
    b = cfg.effective_batch(n)
    trace = []
    for epoch in range(cfg.epochs):
        c_epoch = None
        if dp_cfg is not None:
            c_epoch = clip_schedule(
                dp_cfg.clip_c0, dp_cfg.clip_decay, epoch, dp_cfg.clip_min
            )
        rec = kl = 0.0
        for _ in range(cfg.steps_per_epoch):
            batch = sample_node_batch(n, b, rng)
            noise = rng.standard_normal((n, cfg.latent_dim))
            fwd = gvae_forward(g, params, noise, cfg.add_self_loops)
            rec, _ = bce_rec_loss(g.adj, fwd.p, pos_w, mask_diagonal=True)
            kl, d_mu_kl, d_lv_kl = kl_prior_loss(fwd.mu, fwd.logvar)
            _check_finite("reconstruction loss", rec, epoch)
            _check_finite("KL loss", kl, epoch)

            d_logits = bce_grad_wrt_logits(g.adj, fwd.p, pos_w, mask_diagonal=True)
            full = gvae_backward(
                fwd,
                d_logits,
                d_mu_extra=cfg.lambda1 * d_mu_kl,
                d_logvar_extra=cfg.lambda1 * d_lv_kl,
            )
            enc_grads = {k: full[k] / n for k in ENCODER_KEYS}
            stacks = per_node_decoder_grad_stacks(fwd, params, d_logits)

            enc_opt.step(params, enc_grads, cfg.lr_encoder)
            _generator_update(
                params, stacks, batch, dp_cfg, report, c_epoch, n,
                cfg.lr_generator, rng,
            )
        trace.append(
            {
                "epoch": epoch,
                "rec": rec / n,
                "kl": kl / n,
                "loss": (rec + cfg.lambda1 * kl) / n,
            }
        )
    return Checkpoint(
        model="gvae",
        n_nodes=n,
        edge_count=g.edge_count,
        latent_dim=cfg.latent_dim,
        config=cfg,
        params=params,
        privacy=report,
        loss_trace=trace,
    )


def train_ggan(g: Graph, cfg: TrainConfig) -> Checkpoint:
    """Adversarial trainer with pooled-feature reconstruction.

    Per step, in order and each on a fresh forward pass: the
    discriminator ascends lambda2 * L_gan; the encoder descends
    (L_feat + lambda1 * KL) / n; the generator descends per-node
    contributions of L_feat - lambda2 * L_gan (privatized when cfg.dp
    is set). The reparameterization draw is shared within a step.
    """
    n = g.n
    rng = np.random.default_rng(cfg.seed)
    params = init_gvae_params(rng, n, cfg.latent_dim, cfg.hidden_dim)
    params.update(
        ggan_mod.init_disc_params(
            rng, n, cfg.hidden_dim, cfg.disc_feat_dim, cfg.disc_fnn_hidden
        )
    )
    privacy = _prepare_privacy(cfg, n)
    dp_cfg, report = privacy if privacy else (None, None)
    enc_opt = _Momentum(cfg.momentum, ENCODER_KEYS)
    disc_opt = _Momentum(cfg.momentum, ggan_mod.DISC_KEYS)
    b = cfg.effective_batch(n)
    a = g.adj
    off_diag = 1.0 - np.eye(n)
    trace = []
    for epoch in range(cfg.epochs):
        c_epoch = None
        if dp_cfg is not None:
            c_epoch = clip_schedule(
                dp_cfg.clip_c0, dp_cfg.clip_decay, epoch, dp_cfg.clip_min
            )
        feat = kl = lgan = 0.0
        for _ in range(cfg.steps_per_epoch):
            batch = sample_node_batch(n, b, rng)
            noise = rng.standard_normal((n, cfg.latent_dim))

            # (1) discriminator ascends lambda2 * L_gan
            fwd = gvae_forward(g, params, noise, cfg.add_self_loops)
            # saturated sigmoids yield exact-zero rows whose degree
            # normalization has unbounded gradient; floor keeps the
            # discriminator input non-degenerate under heavy DP noise
            p_masked = np.clip(fwd.p, _P_FLOOR, 1.0) * off_diag
            score_real, _, cache_r = ggan_mod.discriminate(a, params)
            score_fake, _, cache_f = ggan_mod.discriminate(p_masked, params)
            lgan, d_real, d_fake = ggan_mod.gan_loss(score_real, score_fake)
            _check_finite("adversarial loss", lgan, epoch)
            gr, _ = ggan_mod.disc_backward(cache_r, d_score=d_real)
            gf, _ = ggan_mod.disc_backward(cache_f, d_score=d_fake)
            # ascent: step against the negated gradient of lambda2 * L_gan
            d_grads = {
                k: -cfg.lambda2 * (gr[k] + gf[k]) for k in ggan_mod.DISC_KEYS
            }
            disc_opt.step(params, d_grads, cfg.lr_discriminator)

            # (2) encoder descends (L_feat + lambda1 * KL) / n under the new D
            feat, d_p_feat = ggan_mod.feature_rec_loss(a, p_masked, params)
            kl, d_mu_kl, d_lv_kl = kl_prior_loss(fwd.mu, fwd.logvar)
            _check_finite("feature loss", feat, epoch)
            _check_finite("KL loss", kl, epoch)
            d_logits = d_p_feat * off_diag * (fwd.p > _P_FLOOR) * fwd.p * (1.0 - fwd.p)
            full = gvae_backward(
                fwd,
                d_logits,
                d_mu_extra=cfg.lambda1 * d_mu_kl,
                d_logvar_extra=cfg.lambda1 * d_lv_kl,
            )
            enc_grads = {k: full[k] / n for k in ENCODER_KEYS}
            enc_opt.step(params, enc_grads, cfg.lr_encoder)

            # (3) generator descends L_feat - lambda2 * L_gan per node,
            # recomputed under the updated encoder and discriminator
            fwd2 = gvae_forward(g, params, noise, cfg.add_self_loops)
            p2_masked = np.clip(fwd2.p, _P_FLOOR, 1.0) * off_diag
            feat2, d_p_feat2 = ggan_mod.feature_rec_loss(a, p2_masked, params)
            _check_finite("feature loss", feat2, epoch)
            score_fake2, _, cache_f2 = ggan_mod.discriminate(p2_masked, params)
            _, _, d_fake2 = ggan_mod.gan_loss(score_real, score_fake2)
            _, d_p_gan = ggan_mod.disc_backward(
                cache_f2, d_score=-cfg.lambda2 * d_fake2, wrt_input=True
            )
            d_p_gen = (d_p_feat2 + d_p_gan) * off_diag * (fwd2.p > _P_FLOOR)
            d_logits2 = d_p_gen * fwd2.p * (1.0 - fwd2.p)
            stacks = per_node_decoder_grad_stacks(fwd2, params, d_logits2)
            _generator_update(
                params, stacks, batch, dp_cfg, report, c_epoch, n,
                cfg.lr_generator, rng,
            )
        trace.append(
            {
                "epoch": epoch,
                "feat": feat / n,
                "kl": kl / n,
                "gan": lgan,
                "loss": (feat + cfg.lambda1 * kl) / n,
            }
        )
    return Checkpoint(
        model="ggan",
        n_nodes=n,
        edge_count=g.edge_count,
        latent_dim=cfg.latent_dim,
        config=cfg,
        params=params,
        privacy=report,
        loss_trace=trace,
    )
