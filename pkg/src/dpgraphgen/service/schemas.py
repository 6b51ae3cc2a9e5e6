"""Request/response models for the HTTP service.

Graphs travel inline as {n, edges}; checkpoints travel as their JSON
document form, so the server never touches the client's filesystem.
"""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..dp import DpConfig
from ..graphs import Graph
from ..training import TrainConfig


class GraphPayload(BaseModel):
    n: int = Field(ge=1)
    edges: list[tuple[int, int]] = Field(default_factory=list)

    @classmethod
    def from_graph(cls, g: Graph) -> "GraphPayload":
        return cls(n=g.n, edges=g.edges())

    def to_graph(self) -> Graph:
        return Graph.from_edges(self.n, self.edges)


class DpSettings(BaseModel):
    epsilon: float
    delta: float = 1e-5
    clip: float = 1.0
    clip_decay: float = 0.99
    clip_min: float = 0.01
    c0: float = 0.5
    sigma: Optional[float] = None
    override_validity: bool = False
    mean_divisor: Literal["batch", "nodes"] = "batch"

    def to_config(self) -> DpConfig:
        return DpConfig(
            epsilon=self.epsilon,
            delta=self.delta,
            clip_c0=self.clip,
            clip_decay=self.clip_decay,
            clip_min=self.clip_min,
            c0=self.c0,
            sigma=self.sigma,
            override_validity=self.override_validity,
            mean_divisor=self.mean_divisor,
        )


class TrainSettings(BaseModel):
    epochs: int = 200
    steps_per_epoch: int = 1
    batch_nodes: int = 0
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
    pos_weight: Optional[float] = None
    add_self_loops: bool = False
    seed: int = 0

    def to_config(self, dp: Optional[DpSettings]) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            steps_per_epoch=self.steps_per_epoch,
            batch_nodes=self.batch_nodes,
            lr_encoder=self.lr_encoder,
            lr_generator=self.lr_generator,
            lr_discriminator=self.lr_discriminator,
            momentum=self.momentum,
            lambda1=self.lambda1,
            lambda2=self.lambda2,
            latent_dim=self.latent_dim,
            hidden_dim=self.hidden_dim,
            disc_feat_dim=self.disc_feat_dim,
            disc_fnn_hidden=self.disc_fnn_hidden,
            pos_weight=self.pos_weight,
            add_self_loops=self.add_self_loops,
            seed=self.seed,
            dp=dp.to_config() if dp else None,
        )


class TrainRequest(BaseModel):
    graph: GraphPayload
    model: Literal["gvae", "ggan"] = "ggan"
    config: TrainSettings = Field(default_factory=TrainSettings)
    dp: Optional[DpSettings] = None
    released: bool = False


class TrainResponse(BaseModel):
    checkpoint: dict
    privacy: Optional[dict]
    final_losses: dict


class GenerateRequest(BaseModel):
    checkpoint: dict
    count: int = Field(default=1, ge=1)
    mode: Literal["topm", "threshold", "bernoulli"] = "topm"
    n: Optional[int] = None
    edges: Optional[int] = None  # topm edge budget override
    seed: int = 0


class GenerateResponse(BaseModel):
    graphs: list[GraphPayload]


class StatsResponse(BaseModel):
    n: int
    edge_count: int
    lcc: int
    triangle_count: int
    char_path_length: float
    gini_degree: float
    rede: float
    degree_hist: list[int]
    motif_census: list[int]


class CompareRequest(BaseModel):
    original: GraphPayload
    generated: list[GraphPayload]


class CompareResponse(BaseModel):
    gaps: dict
    degree_cosine: float
    motif_cosine: float


class CalibrateRequest(BaseModel):
    epsilon: float
    delta: float = 1e-5
    q: float
    t_max: int
    c0: float = 0.5
    sigma: Optional[float] = None


class CalibrateResponse(BaseModel):
    sigma: float
    c1: Optional[float]
    c2: float
    valid: bool
    message: str


class ProbeRequest(BaseModel):
    graph: GraphPayload
    model: Literal["gvae", "ggan"] = "ggan"
    config: TrainSettings = Field(default_factory=TrainSettings)
    dp: Optional[DpSettings] = None
    folds: int = Field(default=5, ge=1)
    seed: int = 0
    mode: Literal["topm", "threshold", "bernoulli"] = "topm"
    train_fraction: float = 0.8


class ProbeResponse(BaseModel):
    accuracy_mean: float
    accuracy_per_fold: list[float]
    heldout_count: int
    candidate_count: int
    random_baseline: float


class RunRequest(BaseModel):
    config: dict[str, str] = Field(default_factory=dict)
    graphs: list[GraphPayload]
    labels: Optional[list[str]] = None
    name: str = "inline"


class RunResponse(BaseModel):
    rows: list[dict]
    per_graph: list[dict]
    failures: list[dict]
    csv: str
    manifest: dict
