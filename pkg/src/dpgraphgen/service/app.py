"""HTTP facade over the library: stateless, filesystem-free endpoints."""
from __future__ import annotations

import dataclasses

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..datasets import Dataset
from ..dp import DpConfig, PrivacyValidityError, calibrate_sigma
from ..evaluation import link_privacy_probe, similarity_scores, stats_gap
from ..experiment import ConfigError, experiment_config_from_mapping, run_experiment_data
from ..generation import GeneratorHead, sample_many
from ..seeding import derive_seed
from ..stats import compute_stats
from ..training import (
    TrainingDivergedError,
    checkpoint_from_dict,
    checkpoint_to_dict,
    release,
    train_ggan,
    train_gvae,
)
from .schemas import (
    CalibrateRequest,
    CalibrateResponse,
    CompareRequest,
    CompareResponse,
    GenerateRequest,
    GenerateResponse,
    GraphPayload,
    ProbeRequest,
    ProbeResponse,
    RunRequest,
    RunResponse,
    StatsResponse,
    TrainRequest,
    TrainResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="dpgraphgen", version=__version__)

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/train", response_model=TrainResponse)
    def train(req: TrainRequest):
        try:
            g = req.graph.to_graph()
            cfg = req.config.to_config(req.dp)
            trainer = train_gvae if req.model == "gvae" else train_ggan
            ckpt = trainer(g, cfg)
        except PrivacyValidityError as exc:
            raise HTTPException(status_code=400, detail=f"privacy validity: {exc}")
        except TrainingDivergedError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        if req.released:
            ckpt = release(ckpt)
        return TrainResponse(
            checkpoint=checkpoint_to_dict(ckpt),
            privacy=ckpt.privacy.to_dict() if ckpt.privacy else None,
            final_losses=ckpt.loss_trace[-1] if ckpt.loss_trace else {},
        )

    @app.post("/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest):
        try:
            ckpt = checkpoint_from_dict(req.checkpoint)
            gen = GeneratorHead.from_checkpoint(ckpt)
            rng = np.random.default_rng(req.seed)
            graphs = sample_many(
                gen, rng, req.count, n=req.n, mode=req.mode, m=req.edges
            )
        except (ValueError, KeyError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return GenerateResponse(graphs=[GraphPayload.from_graph(g) for g in graphs])

    @app.post("/stats", response_model=StatsResponse)
    def stats(req: GraphPayload):
        try:
            report = compute_stats(req.to_graph())
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return StatsResponse(**report.to_dict())

    @app.post("/stats/compare", response_model=CompareResponse)
    def compare(req: CompareRequest):
        try:
            original = req.original.to_graph()
            generated = [p.to_graph() for p in req.generated]
            gaps = stats_gap(original, generated)
            sims = similarity_scores(original, generated)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return CompareResponse(gaps=gaps, **sims)

    @app.post("/calibrate", response_model=CalibrateResponse)
    def calibrate(req: CalibrateRequest):
        try:
            cfg = DpConfig(
                epsilon=req.epsilon,
                delta=req.delta,
                q=req.q,
                t_max=req.t_max,
                c0=req.c0,
                sigma=req.sigma,
            )
            result = calibrate_sigma(cfg)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return CalibrateResponse(**result.to_dict())

    @app.post("/probe", response_model=ProbeResponse)
    def probe(req: ProbeRequest):
        try:
            g = req.graph.to_graph()
            cfg = req.config.to_config(req.dp)
            trainer = train_gvae if req.model == "gvae" else train_ggan
            result = link_privacy_probe(
                g,
                trainer,
                cfg,
                k_folds=req.folds,
                seed=req.seed,
                mode=req.mode,
                train_fraction=req.train_fraction,
            )
        except PrivacyValidityError as exc:
            raise HTTPException(status_code=400, detail=f"privacy validity: {exc}")
        except (TrainingDivergedError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return ProbeResponse(**result.to_dict())

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest):
        try:
            cfg_map = dict(req.config)
            cfg_map.pop("dataset", None)  # dataset arrives inline
            cfg = experiment_config_from_mapping(cfg_map)
            cfg = dataclasses.replace(cfg, dataset=req.name)
            graphs = [p.to_graph() for p in req.graphs]
            if not graphs:
                raise ConfigError("no graphs supplied")
            labels = req.labels or [f"graph_{i:03d}" for i in range(len(graphs))]
            if len(labels) != len(graphs):
                raise ConfigError("labels and graphs differ in length")
            dataset = Dataset(name=req.name, graphs=graphs, labels=labels)
            result = run_experiment_data(cfg, dataset)
        except (ConfigError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return RunResponse(
            rows=result.rows,
            per_graph=result.per_graph,
            failures=result.failures,
            csv=result.csv_text,
            manifest=result.manifest,
        )

    return app


app = create_app()
