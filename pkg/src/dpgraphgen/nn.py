"""Minimal dense neural-net blocks with hand-written backward passes.

Everything is float64 numpy. Parameters and gradients travel as plain
dicts of named 2-D arrays (a "param set" / "grad set"); the training
code decides which names participate in which update.

Two building blocks:

* gcn2: X -> A_hat @ relu(A_hat @ X @ W0) @ W1 (two-layer graph
  convolution with a fixed propagation matrix A_hat).
* fnn2: X -> relu(X @ W0) @ W1 (two-layer feed-forward net).

Backward passes take the forward cache plus the upstream gradient and
return gradients for the weights and the input. ReLU uses the x > 0
subgradient (exactly 0 at 0).
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import expit

ParamSet = dict[str, np.ndarray]
GradSet = dict[str, np.ndarray]

PARAMS_FORMAT = "dpgraphgen-params"
PARAMS_VERSION = 1


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Overflow-safe logistic function."""
    return expit(x)


def glorot_init(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Uniform Glorot initialization for a rows x cols weight matrix."""
    limit = math.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def _require_2d(name: str, a: np.ndarray):
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")


def gcn2_forward(a_hat: np.ndarray, x: np.ndarray, w0: np.ndarray, w1: np.ndarray):
    """Two-layer GCN forward; returns (output, cache)."""
    for name, m in (("a_hat", a_hat), ("x", x), ("w0", w0), ("w1", w1)):
        _require_2d(name, m)
    if a_hat.shape[0] != a_hat.shape[1] or a_hat.shape[1] != x.shape[0]:
        raise ValueError(f"a_hat {a_hat.shape} incompatible with x {x.shape}")
    if x.shape[1] != w0.shape[0]:
        raise ValueError(f"x {x.shape} incompatible with w0 {w0.shape}")
    if w0.shape[1] != w1.shape[0]:
        raise ValueError(f"w0 {w0.shape} incompatible with w1 {w1.shape}")
    ax = a_hat @ x
    s = ax @ w0
    h = relu(s)
    ah = a_hat @ h
    out = ah @ w1
    cache = {"a_hat": a_hat, "ax": ax, "s": s, "h": h, "ah": ah, "w0": w0, "w1": w1}
    return out, cache


def gcn2_backward(cache: dict, d_out: np.ndarray):
    """Gradients (d_w0, d_w1, d_x) for gcn2_forward."""
    a_hat = cache["a_hat"]
    d_w1 = cache["ah"].T @ d_out
    d_ah = d_out @ cache["w1"].T
    d_h = a_hat.T @ d_ah
    d_s = d_h * (cache["s"] > 0)
    d_w0 = cache["ax"].T @ d_s
    d_x = a_hat.T @ (d_s @ cache["w0"].T)
    return d_w0, d_w1, d_x


def fnn2_forward(x: np.ndarray, w0: np.ndarray, w1: np.ndarray):
    """Two-layer feed-forward forward; returns (output, cache)."""
    for name, m in (("x", x), ("w0", w0), ("w1", w1)):
        _require_2d(name, m)
    if x.shape[1] != w0.shape[0]:
        raise ValueError(f"x {x.shape} incompatible with w0 {w0.shape}")
    if w0.shape[1] != w1.shape[0]:
        raise ValueError(f"w0 {w0.shape} incompatible with w1 {w1.shape}")
    s = x @ w0
    h = relu(s)
    out = h @ w1
    cache = {"x": x, "s": s, "h": h, "w0": w0, "w1": w1}
    return out, cache


def fnn2_backward(cache: dict, d_out: np.ndarray):
    """Gradients (d_w0, d_w1, d_x) for fnn2_forward."""
    d_w1 = cache["h"].T @ d_out
    d_h = d_out @ cache["w1"].T
    d_s = d_h * (cache["s"] > 0)
    d_w0 = cache["x"].T @ d_s
    d_x = d_s @ cache["w0"].T
    return d_w0, d_w1, d_x


# -- param-set utilities ----------------------------------------------------


def zeros_like_params(params: ParamSet) -> GradSet:
    return {k: np.zeros_like(v) for k, v in params.items()}


def clone_params(params: ParamSet) -> ParamSet:
    return {k: v.copy() for k, v in params.items()}


def add_scaled(target: GradSet, source: GradSet, scale: float = 1.0):
    """target[k] += scale * source[k] in place, over source's keys."""
    for k, v in source.items():
        target[k] = target[k] + scale * v
    return target


def scale_params(params: GradSet, scale: float) -> GradSet:
    return {k: v * scale for k, v in params.items()}


def global_norm(grads: GradSet) -> float:
    """Euclidean norm of all entries across every matrix in the set."""
    total = 0.0
    for v in grads.values():
        total += float(np.sum(v * v))
    return math.sqrt(total)


def grad_check(loss_and_grads, params: ParamSet, step: float = 1e-5) -> float:
    """Central-difference check of analytic gradients.

    loss_and_grads(params) must return (scalar loss, grad set). For each
    parameter matrix the analytic gradient is compared against central
    differences entry by entry; the returned figure is the worst
    norm-relative error ||analytic - fd|| / max(||analytic||, ||fd||)
    over the matrices (1.0 denominator floor guards all-zero gradients).
    """
    _, analytic = loss_and_grads(params)
    worst = 0.0
    for key in sorted(analytic):
        base = params[key]
        fd = np.zeros_like(base)
        for idx in np.ndindex(base.shape):
            bumped = dict(params)
            plus = base.copy()
            plus[idx] += step
            bumped[key] = plus
            lp, _ = loss_and_grads(bumped)
            minus = base.copy()
            minus[idx] -= step
            bumped[key] = minus
            lm, _ = loss_and_grads(bumped)
            fd[idx] = (lp - lm) / (2.0 * step)
        denom = max(np.linalg.norm(analytic[key]), np.linalg.norm(fd), 1e-12)
        worst = max(worst, float(np.linalg.norm(analytic[key] - fd) / denom))
    return worst


# -- serialization ----------------------------------------------------------


def params_to_jsonable(params: ParamSet) -> dict:
    """Stable JSON form: row-major data with explicit shape."""
    matrices = {}
    for k in sorted(params):
        v = np.asarray(params[k], dtype=np.float64)
        _require_2d(k, v)
        matrices[k] = {
            "rows": int(v.shape[0]),
            "cols": int(v.shape[1]),
            "data": v.reshape(-1).tolist(),
        }
    return {"format": PARAMS_FORMAT, "version": PARAMS_VERSION, "matrices": matrices}


def params_from_jsonable(obj: dict) -> ParamSet:
    if not isinstance(obj, dict) or obj.get("format") != PARAMS_FORMAT:
        raise ValueError("not a parameter-set document")
    if obj.get("version") != PARAMS_VERSION:
        raise ValueError(f"unsupported parameter-set version {obj.get('version')!r}")
    params = {}
    for k, m in obj["matrices"].items():
        rows, cols = int(m["rows"]), int(m["cols"])
        data = np.asarray(m["data"], dtype=np.float64)
        if data.size != rows * cols:
            raise ValueError(f"matrix {k}: {data.size} values for {rows}x{cols}")
        params[k] = data.reshape(rows, cols)
    return params
