"""End-to-end experiment runner: corpus in, aggregated report out.

A plain-text config (``key = value`` lines, ``#`` comments) names a
dataset and a grid of (model, epsilon) settings. Every graph in the
corpus is trained and sampled independently under a per-graph seed
derived from the manifest's global seed, then utility gaps and
similarity scores are aggregated per setting.

Outputs: ``report.csv`` (one row per model/epsilon), ``report.json``
(rows plus per-graph detail plus failures), ``manifest.json`` (tool
version, global seed, config echo + hash, per-graph seeds, timestamps).
Reports are byte-stable given the same config; only the manifest
carries wall-clock timestamps.
"""
from __future__ import annotations

import concurrent.futures
import dataclasses
import hashlib
import json
import os
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .datasets import Dataset, DatasetError, load_dataset
from .dp import MEAN_DIVISORS, DpConfig
from .evaluation import similarity_scores, stats_gap
from .generation import MODES, GeneratorHead, sample_many
from .graphs import Graph
from .seeding import derive_seed
from .training import TrainConfig, train_ggan, train_gvae

MANIFEST_FORMAT = "dpgraphgen-manifest"
MANIFEST_VERSION = 1

MODELS = ("gvae", "ggan")

CSV_COLUMNS = (
    "model",
    "epsilon",
    "graphs",
    "failed",
    "lcc_gap",
    "triangle_gap",
    "cpl_gap",
    "gini_gap",
    "rede_gap",
    "degree_cosine",
    "motif_cosine",
)

_GAP_TO_COLUMN = {
    "lcc": "lcc_gap",
    "triangle_count": "triangle_gap",
    "char_path_length": "cpl_gap",
    "gini_degree": "gini_gap",
    "rede": "rede_gap",
}


class ConfigError(ValueError):
    """Malformed or incomplete experiment configuration."""


@dataclasses.dataclass
class ExperimentConfig:
    dataset: str | None = None
    models: tuple = ("ggan",)
    epsilons: tuple = (None,)  # None means non-private
    delta: float = 1e-5
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
    clip: float = 1.0
    clip_decay: float = 0.99
    clip_min: float = 0.01
    c0: float = 0.5
    override_validity: bool = False
    mean_divisor: str = "batch"
    samples_per_graph: int = 1
    mode: str = "topm"
    seed: int = 0
    jobs: int = 1

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["models"] = list(self.models)
        d["epsilons"] = [e for e in self.epsilons]
        return d


_BOOL_WORDS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def parse_config_text(text: str) -> dict:
    """Flat key = value lines into a string dict; later keys win."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _parse_bool(key: str, value: str) -> bool:
    try:
        return _BOOL_WORDS[value.lower()]
    except KeyError:
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def experiment_config_from_mapping(raw: dict) -> ExperimentConfig:
    """Typed config from a flat string mapping; unknown keys are errors."""
    kwargs = {}
    fields = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    for key, value in raw.items():
        if key not in fields:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "models":
            models = tuple(m.strip() for m in value.split(",") if m.strip())
            for m in models:
                if m not in MODELS:
                    raise ConfigError(f"unknown model {m!r}; expected one of {MODELS}")
            if not models:
                raise ConfigError("models: empty list")
            kwargs[key] = models
        elif key == "epsilons":
            eps = []
            for tok in value.split(","):
                tok = tok.strip()
                if not tok:
                    continue
                if tok.lower() == "none":
                    eps.append(None)
                else:
                    try:
                        eps.append(float(tok))
                    except ValueError:
                        raise ConfigError(f"epsilons: bad value {tok!r}")
            if not eps:
                raise ConfigError("epsilons: empty list")
            kwargs[key] = tuple(eps)
        elif key == "override_validity":
            kwargs[key] = _parse_bool(key, value)
        elif key == "dataset":
            kwargs[key] = value
        elif key == "mean_divisor":
            if value not in MEAN_DIVISORS:
                raise ConfigError(f"mean_divisor must be one of {MEAN_DIVISORS}")
            kwargs[key] = value
        elif key == "mode":
            if value not in MODES:
                raise ConfigError(f"mode must be one of {MODES}")
            kwargs[key] = value
        else:
            target = fields[key].type
            try:
                if target == "int" or isinstance(fields[key].default, int):
                    kwargs[key] = int(value)
                else:
                    kwargs[key] = float(value)
            except ValueError:
                raise ConfigError(f"{key}: bad numeric value {value!r}")
    cfg = ExperimentConfig(**kwargs)
    if cfg.samples_per_graph < 1:
        raise ConfigError("samples_per_graph must be positive")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be positive")
    return cfg


def load_experiment_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = experiment_config_from_mapping(parse_config_text(text))
    if not cfg.dataset:
        raise ConfigError("config is missing the required 'dataset' key")
    return cfg


def config_hash(cfg: ExperimentConfig) -> str:
    canon = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _train_config(cfg: ExperimentConfig, epsilon: float | None, seed: int) -> TrainConfig:
    dp = None
    if epsilon is not None:
        dp = DpConfig(
            epsilon=epsilon,
            delta=cfg.delta,
            clip_c0=cfg.clip,
            clip_decay=cfg.clip_decay,
            clip_min=cfg.clip_min,
            c0=cfg.c0,
            override_validity=cfg.override_validity,
            mean_divisor=cfg.mean_divisor,
        )
    return TrainConfig(
        epochs=cfg.epochs,
        steps_per_epoch=cfg.steps_per_epoch,
        batch_nodes=cfg.batch_nodes,
        lr_encoder=cfg.lr_encoder,
        lr_generator=cfg.lr_generator,
        lr_discriminator=cfg.lr_discriminator,
        momentum=cfg.momentum,
        lambda1=cfg.lambda1,
        lambda2=cfg.lambda2,
        latent_dim=cfg.latent_dim,
        hidden_dim=cfg.hidden_dim,
        disc_feat_dim=cfg.disc_feat_dim,
        disc_fnn_hidden=cfg.disc_fnn_hidden,
        seed=seed,
        dp=dp,
    )


def _run_cell(payload):
    """One (graph, model, epsilon) training + sampling + scoring job.

    Top-level so a process pool can pick it up; returns a plain dict.
    """
    graph, label, model, epsilon, cfg, graph_seed = payload
    try:
        tcfg = _train_config(cfg, epsilon, graph_seed)
        train = train_gvae if model == "gvae" else train_ggan
        ckpt = train(graph, tcfg)
        gen = GeneratorHead.from_checkpoint(ckpt)
        gen_rng = np.random.default_rng(derive_seed(graph_seed, "generate"))
        samples = sample_many(gen, gen_rng, cfg.samples_per_graph, mode=cfg.mode)
        gaps = stats_gap(graph, samples)
        sims = similarity_scores(graph, samples)
        return {
            "label": label,
            "model": model,
            "epsilon": epsilon,
            "ok": True,
            "gaps": gaps,
            "similarity": sims,
        }
    except Exception as exc:  # noqa: BLE001 - per-graph isolation is the point
        return {
            "label": label,
            "model": model,
            "epsilon": epsilon,
            "ok": False,
            "error": f"{type(exc).__name__}: {exc}",
        }


def _format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclasses.dataclass
class ExperimentResult:
    rows: list[dict]
    per_graph: list[dict]
    failures: list[dict]
    csv_text: str
    manifest: dict


def run_experiment_data(cfg: ExperimentConfig, dataset: Dataset) -> ExperimentResult:
    """Run the whole grid over an in-memory dataset."""
    created = datetime.now(timezone.utc).isoformat()
    graph_seeds = [derive_seed(cfg.seed, "graph", i) for i in range(len(dataset.graphs))]
    payloads = []
    for model in cfg.models:
        for epsilon in cfg.epsilons:
            for i, (graph, label) in enumerate(zip(dataset.graphs, dataset.labels)):
                payloads.append((graph, label, model, epsilon, cfg, graph_seeds[i]))
    if cfg.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            outcomes = list(pool.map(_run_cell, payloads))
    else:
        outcomes = [_run_cell(p) for p in payloads]

    rows = []
    failures = [o for o in outcomes if not o["ok"]]
    for model in cfg.models:
        for epsilon in cfg.epsilons:
            cell = [o for o in outcomes if o["model"] == model and o["epsilon"] == epsilon]
            good = [o for o in cell if o["ok"]]
            row = {"model": model, "epsilon": epsilon, "graphs": len(good),
                   "failed": len(cell) - len(good)}
            for gap_key, col in _GAP_TO_COLUMN.items():
                row[col] = (
                    float(np.mean([o["gaps"][gap_key] for o in good])) if good else None
                )
            for sim_key in ("degree_cosine", "motif_cosine"):
                row[sim_key] = (
                    float(np.mean([o["similarity"][sim_key] for o in good])) if good else None
                )
            rows.append(row)

    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_format_value(row[c]) for c in CSV_COLUMNS))
    csv_text = "\n".join(lines) + "\n"

    manifest = {
        "format": MANIFEST_FORMAT,
        "version": MANIFEST_VERSION,
        "tool_version": __version__,
        "global_seed": cfg.seed,
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg),
        "dataset_name": dataset.name,
        "graph_labels": list(dataset.labels),
        "graph_seeds": graph_seeds,
        "created_at": created,
        "finished_at": datetime.now(timezone.utc).isoformat(),
        "failure_count": len(failures),
    }
    return ExperimentResult(
        rows=rows,
        per_graph=outcomes,
        failures=failures,
        csv_text=csv_text,
        manifest=manifest,
    )


def write_experiment_outputs(result: ExperimentResult, out_dir) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "csv": os.path.join(out_dir, "report.csv"),
        "json": os.path.join(out_dir, "report.json"),
        "manifest": os.path.join(out_dir, "manifest.json"),
    }
    with open(paths["csv"], "w") as fh:
        fh.write(result.csv_text)
    report = {
        "rows": result.rows,
        "per_graph": result.per_graph,
        "failures": result.failures,
    }
    with open(paths["json"], "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(paths["manifest"], "w") as fh:
        json.dump(result.manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return paths


def run_experiment(config_path, out_dir=None) -> tuple[ExperimentResult, dict]:
    """File-to-file convenience wrapper used by tests and direct callers."""
    cfg = load_experiment_config(config_path)
    try:
        dataset = load_dataset(cfg.dataset)
    except DatasetError as exc:
        raise ConfigError(str(exc)) from exc
    result = run_experiment_data(cfg, dataset)
    if out_dir is None:
        out_dir = os.environ.get("DPGRAPHGEN_OUT", ".")
    paths = write_experiment_outputs(result, out_dir)
    return result, paths
