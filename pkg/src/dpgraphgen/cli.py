"""Command-line client for the service.

Every subcommand except ``serve`` is a thin HTTP client: it reads and
writes local files, ships content to the service, and saves what comes
back. The service address comes from --server or DPGRAPHGEN_SERVER;
the default output directory from DPGRAPHGEN_OUT.
"""
from __future__ import annotations

import json
import os
import sys

import click
import httpx

from .datasets import DatasetError, load_dataset, load_edge_list, save_edge_list
from .experiment import ConfigError, load_experiment_config, parse_config_text
from .graphs import Graph

DEFAULT_SERVER = "http://127.0.0.1:8000"


def _server(ctx) -> str:
    return ctx.obj.get("server") or os.environ.get("DPGRAPHGEN_SERVER", DEFAULT_SERVER)


def _out_dir(explicit: str | None) -> str:
    return explicit or os.environ.get("DPGRAPHGEN_OUT", ".")


def _seed(ctx, local: int | None) -> int:
    if local is not None:
        return local
    if ctx.obj.get("seed") is not None:
        return ctx.obj["seed"]
    return 0


def _post(ctx, path: str, payload: dict) -> dict:
    url = _server(ctx).rstrip("/") + path
    try:
        resp = httpx.post(url, json=payload, timeout=None)
    except httpx.HTTPError as exc:
        raise click.ClickException(f"cannot reach service at {url}: {exc}")
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise click.ClickException(f"{path} failed ({resp.status_code}): {detail}")
    return resp.json()


def _graph_payload(g: Graph) -> dict:
    return {"n": g.n, "edges": g.edges()}


def _load_graph(path: str) -> Graph:
    try:
        return load_edge_list(path)
    except DatasetError as exc:
        raise click.ClickException(str(exc))


def _write_json(obj: dict, path: str | None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
        click.echo(f"wrote {path}")
    else:
        click.echo(text, nl=False)


def _dp_payload(epsilon, delta, clip, clip_decay, clip_min, c0, sigma,
                override_validity, mean_divisor):
    if epsilon is None:
        return None
    return {
        "epsilon": epsilon,
        "delta": delta,
        "clip": clip,
        "clip_decay": clip_decay,
        "clip_min": clip_min,
        "c0": c0,
        "sigma": sigma,
        "override_validity": override_validity,
        "mean_divisor": mean_divisor,
    }


_train_options = [
    click.option("--epochs", type=int, default=200, show_default=True),
    click.option("--steps-per-epoch", type=int, default=1, show_default=True),
    click.option("--batch-nodes", type=int, default=0, show_default=True,
                 help="nodes sampled per step; 0 = all"),
    click.option("--lr-encoder", type=float, default=0.01, show_default=True),
    click.option("--lr-generator", type=float, default=0.01, show_default=True),
    click.option("--lr-discriminator", type=float, default=0.01, show_default=True),
    click.option("--momentum", type=float, default=0.9, show_default=True),
    click.option("--lambda1", type=float, default=1.0, show_default=True),
    click.option("--lambda2", type=float, default=0.1, show_default=True),
    click.option("--latent-dim", type=int, default=16, show_default=True),
    click.option("--hidden-dim", type=int, default=32, show_default=True),
    click.option("--epsilon", type=float, default=None,
                 help="edge-DP budget; omit for non-private training"),
    click.option("--delta", type=float, default=1e-5, show_default=True),
    click.option("--clip", type=float, default=1.0, show_default=True,
                 help="initial per-node clipping norm"),
    click.option("--clip-decay", type=float, default=0.99, show_default=True),
    click.option("--clip-min", type=float, default=0.01, show_default=True),
    click.option("--c0", type=float, default=0.5, show_default=True),
    click.option("--sigma", type=float, default=None,
                 help="explicit noise multiplier (skips calibration)"),
    click.option("--override-validity", is_flag=True,
                 help="train even when the noise bound's validity check fails"),
    click.option("--mean-divisor", type=click.Choice(["batch", "nodes"]),
                 default="batch", show_default=True),
    click.option("--seed", type=int, default=None, help="training seed"),
]


def _apply(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


def _train_settings(seed, **kw) -> dict:
    return {
        "epochs": kw["epochs"],
        "steps_per_epoch": kw["steps_per_epoch"],
        "batch_nodes": kw["batch_nodes"],
        "lr_encoder": kw["lr_encoder"],
        "lr_generator": kw["lr_generator"],
        "lr_discriminator": kw["lr_discriminator"],
        "momentum": kw["momentum"],
        "lambda1": kw["lambda1"],
        "lambda2": kw["lambda2"],
        "latent_dim": kw["latent_dim"],
        "hidden_dim": kw["hidden_dim"],
        "seed": seed,
    }


@click.group()
@click.option("--server", default=None,
              help=f"service base URL (env DPGRAPHGEN_SERVER, default {DEFAULT_SERVER})")
@click.option("--seed", type=int, default=None, help="default seed for subcommands")
@click.pass_context
def main(ctx, server, seed):
    """Differentially private graph generation, as a service client."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server
    ctx.obj["seed"] = seed


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--model", type=click.Choice(["gvae", "ggan"]), default="ggan",
              show_default=True)
@click.option("--released", is_flag=True,
              help="strip encoder/discriminator weights from the saved checkpoint")
@click.option("--out", "out_path", default=None, help="checkpoint path (JSON)")
@_apply(_train_options)
@click.pass_context
def train(ctx, input_path, model, released, out_path, seed, epsilon, delta, clip,
          clip_decay, clip_min, c0, sigma, override_validity, mean_divisor, **kw):
    """Train a model on an edge-list graph and save the checkpoint."""
    g = _load_graph(input_path)
    payload = {
        "graph": _graph_payload(g),
        "model": model,
        "config": _train_settings(_seed(ctx, seed), **kw),
        "dp": _dp_payload(epsilon, delta, clip, clip_decay, clip_min, c0, sigma,
                          override_validity, mean_divisor),
        "released": released,
    }
    result = _post(ctx, "/train", payload)
    if out_path is None:
        base = os.path.splitext(os.path.basename(input_path))[0]
        out_path = os.path.join(_out_dir(None), f"{base}.{model}.checkpoint.json")
    with open(out_path, "w") as fh:
        json.dump(result["checkpoint"], fh, sort_keys=True)
        fh.write("\n")
    click.echo(f"wrote {out_path}")
    if result.get("final_losses"):
        losses = ", ".join(
            f"{k}={v:.4f}" for k, v in sorted(result["final_losses"].items())
            if k != "epoch"
        )
        click.echo(f"final losses: {losses}")
    if result.get("privacy"):
        p = result["privacy"]
        click.echo(
            f"privacy: epsilon={p['epsilon']} delta={p['delta']} "
            f"sigma={p['sigma']:.4f} steps={p['steps']} valid={p['valid']}"
        )


@main.command()
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path())
@click.option("--count", type=int, default=1, show_default=True)
@click.option("--mode", type=click.Choice(["topm", "threshold", "bernoulli"]),
              default="topm", show_default=True)
@click.option("--n", "n_nodes", type=int, default=None,
              help="node count (defaults to the training graph's)")
@click.option("--edges", type=int, default=None, help="edge budget for topm")
@click.option("--seed", type=int, default=None)
@click.option("--out-dir", default=None,
              help="directory for sample_NNN.edgelist files")
@click.pass_context
def generate(ctx, ckpt_path, count, mode, n_nodes, edges, seed, out_dir):
    """Sample synthetic graphs from a trained checkpoint."""
    try:
        with open(ckpt_path) as fh:
            ckpt = json.load(fh)
    except (OSError, ValueError) as exc:
        raise click.ClickException(f"cannot read checkpoint {ckpt_path}: {exc}")
    payload = {
        "checkpoint": ckpt,
        "count": count,
        "mode": mode,
        "n": n_nodes,
        "edges": edges,
        "seed": _seed(ctx, seed),
    }
    result = _post(ctx, "/generate", payload)
    out_dir = _out_dir(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    for i, gp in enumerate(result["graphs"]):
        g = Graph.from_edges(gp["n"], gp["edges"])
        path = os.path.join(out_dir, f"sample_{i:03d}.edgelist")
        save_edge_list(g, path)
        click.echo(f"wrote {path}")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--generated", "generated_dir", default=None, type=click.Path(),
              help="directory of generated *.edgelist files to compare against")
@click.option("--out", "out_path", default=None)
@click.pass_context
def stats(ctx, input_path, generated_dir, out_path):
    """Structure statistics of a graph, or gaps against generated samples."""
    g = _load_graph(input_path)
    if generated_dir is None:
        result = _post(ctx, "/stats", _graph_payload(g))
        _write_json(result, out_path)
        return
    try:
        ds = load_dataset(generated_dir)
    except DatasetError as exc:
        raise click.ClickException(str(exc))
    payload = {
        "original": _graph_payload(g),
        "generated": [_graph_payload(x) for x in ds.graphs],
    }
    result = _post(ctx, "/stats/compare", payload)
    gaps = result["gaps"]
    header = ["lcc_gap", "triangle_gap", "cpl_gap", "gini_gap", "rede_gap",
              "degree_cosine", "motif_cosine"]
    values = [
        gaps["lcc"], gaps["triangle_count"], gaps["char_path_length"],
        gaps["gini_degree"], gaps["rede"],
        result["degree_cosine"], result["motif_cosine"],
    ]
    csv_text = ",".join(header) + "\n" + ",".join(repr(float(v)) for v in values) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(csv_text)
        click.echo(f"wrote {out_path}")
    else:
        click.echo(csv_text, nl=False)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--model", type=click.Choice(["gvae", "ggan"]), default="ggan",
              show_default=True)
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--mode", type=click.Choice(["topm", "threshold", "bernoulli"]),
              default="topm", show_default=True)
@click.option("--train-fraction", type=float, default=0.8, show_default=True)
@click.option("--out", "out_path", default=None)
@_apply(_train_options)
@click.pass_context
def probe(ctx, input_path, model, folds, mode, train_fraction, out_path, seed,
          epsilon, delta, clip, clip_decay, clip_min, c0, sigma, override_validity,
          mean_divisor, **kw):
    """Link-reconstruction attack accuracy against a trained model."""
    g = _load_graph(input_path)
    payload = {
        "graph": _graph_payload(g),
        "model": model,
        "config": _train_settings(_seed(ctx, seed), **kw),
        "dp": _dp_payload(epsilon, delta, clip, clip_decay, clip_min, c0, sigma,
                          override_validity, mean_divisor),
        "folds": folds,
        "seed": _seed(ctx, seed),
        "mode": mode,
        "train_fraction": train_fraction,
    }
    result = _post(ctx, "/probe", payload)
    _write_json(
        {
            "accuracy_mean": result["accuracy_mean"],
            "accuracy_per_fold": result["accuracy_per_fold"],
        },
        out_path,
    )


@main.command()
@click.option("--epsilon", type=float, required=True)
@click.option("--delta", type=float, default=1e-5, show_default=True)
@click.option("--q", type=float, required=True, help="per-step node sampling rate")
@click.option("--t-max", type=int, required=True, help="total training steps")
@click.option("--c0", type=float, default=0.5, show_default=True)
@click.option("--sigma", type=float, default=None,
              help="check an explicit multiplier instead of calibrating")
@click.pass_context
def calibrate(ctx, epsilon, delta, q, t_max, c0, sigma):
    """Compute the noise multiplier and its validity for a DP setting."""
    result = _post(ctx, "/calibrate", {
        "epsilon": epsilon, "delta": delta, "q": q, "t_max": t_max,
        "c0": c0, "sigma": sigma,
    })
    _write_json(result, None)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out-dir", default=None)
@click.pass_context
def run(ctx, config_path, out_dir):
    """Run a full experiment grid from a config file."""
    try:
        cfg = load_experiment_config(config_path)
        with open(config_path) as fh:
            raw = parse_config_text(fh.read())
        ds = load_dataset(cfg.dataset)
    except (ConfigError, DatasetError) as exc:
        raise click.ClickException(str(exc))
    if ctx.obj.get("seed") is not None and "seed" not in raw:
        raw["seed"] = str(ctx.obj["seed"])
    payload = {
        "config": raw,
        "graphs": [_graph_payload(g) for g in ds.graphs],
        "labels": ds.labels,
        "name": ds.name,
    }
    result = _post(ctx, "/run", payload)
    out_dir = _out_dir(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "report.csv")
    with open(csv_path, "w") as fh:
        fh.write(result["csv"])
    json_path = os.path.join(out_dir, "report.json")
    with open(json_path, "w") as fh:
        json.dump(
            {"rows": result["rows"], "per_graph": result["per_graph"],
             "failures": result["failures"]},
            fh, sort_keys=True, indent=2,
        )
        fh.write("\n")
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(result["manifest"], fh, sort_keys=True, indent=2)
        fh.write("\n")
    for path in (csv_path, json_path, manifest_path):
        click.echo(f"wrote {path}")
    if result["failures"]:
        for f in result["failures"]:
            click.echo(
                f"FAILED {f['label']} model={f['model']} "
                f"epsilon={f['epsilon']}: {f['error']}", err=True,
            )
        sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("dpgraphgen.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
