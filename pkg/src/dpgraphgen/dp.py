"""Per-node gradient privatization: clip, add Gaussian noise, average.

One training step aggregates per-node gradient contributions

    g_tilde = (1/B) * ( sum_i clip(g_i, C) + N(0, sigma^2 C^2 I) )

where clip rescales a contribution to Euclidean norm at most C across
all its matrices jointly. The noise multiplier sigma comes from the
moments-accountant style bound

    sigma = c2 * q * sqrt(T * ln(1/delta)) / epsilon,
    c2 = 1 / sqrt(c0 * (1 - c0)),

valid when epsilon < c1 * q^2 * T with c1 = ln(1 / (q * sigma)) / c0,
for an interpolation constant c0 in (0, 1). Calibration always computes
sigma first and then reports whether the validity condition holds;
callers decide what to do with an invalid setting.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from .nn import GradSet, global_norm

MEAN_DIVISORS = ("batch", "nodes")


class PrivacyValidityError(ValueError):
    """Raised when training would run outside the calibration's validity range."""


@dataclasses.dataclass
class DpConfig:
    """Privacy settings for a training run.

    q and t_max describe the sampling rate and total step count; the
    trainer fills them in from its own configuration when absent. sigma
    left as None means "calibrate from (epsilon, delta, q, t_max)".
    """

    epsilon: float
    delta: float = 1e-5
    clip_c0: float = 1.0
    clip_decay: float = 0.99
    clip_min: float = 0.01
    c0: float = 0.5
    sigma: float | None = None
    q: float | None = None
    t_max: int | None = None
    override_validity: bool = False
    mean_divisor: str = "batch"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.clip_c0 <= 0:
            raise ValueError(f"clip_c0 must be positive, got {self.clip_c0}")
        if not 0.0 < self.clip_decay <= 1.0:
            raise ValueError(f"clip_decay must lie in (0, 1], got {self.clip_decay}")
        if self.clip_min <= 0:
            raise ValueError(f"clip_min must be positive, got {self.clip_min}")
        if not 0.0 < self.c0 < 1.0:
            raise ValueError(f"c0 must lie in (0, 1), got {self.c0}")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if self.q is not None and not 0.0 < self.q <= 1.0:
            raise ValueError(f"q must lie in (0, 1], got {self.q}")
        if self.t_max is not None and self.t_max < 1:
            raise ValueError(f"t_max must be at least 1, got {self.t_max}")
        if self.mean_divisor not in MEAN_DIVISORS:
            raise ValueError(f"mean_divisor must be one of {MEAN_DIVISORS}")


@dataclasses.dataclass
class CalibrationResult:
    sigma: float
    c1: float | None
    c2: float
    valid: bool
    message: str

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def calibrate_sigma(cfg: DpConfig) -> CalibrationResult:
    """Noise multiplier plus validity verdict for a fully specified config.

    Requires cfg.q and cfg.t_max. An explicitly set cfg.sigma is kept
    and only checked for validity.
    """
    if cfg.q is None or cfg.t_max is None:
        raise ValueError("calibration needs q and t_max set")
    c2 = 1.0 / math.sqrt(cfg.c0 * (1.0 - cfg.c0))
    if cfg.sigma is not None:
        sigma = cfg.sigma
    else:
        sigma = c2 * cfg.q * math.sqrt(cfg.t_max * math.log(1.0 / cfg.delta)) / cfg.epsilon
    qs = cfg.q * sigma
    if qs == 0.0:
        # sigma = 0 is the noise-free degenerate setting; the bound's
        # constant c1 diverges and imposes no constraint.
        return CalibrationResult(
            sigma=sigma,
            c1=None,
            c2=c2,
            valid=True,
            message="sigma = 0: no noise is added; the validity bound is vacuous",
        )
    if qs >= 1.0:
        return CalibrationResult(
            sigma=sigma,
            c1=None,
            c2=c2,
            valid=False,
            message=(
                f"q*sigma = {qs:.6g} >= 1: the bound's constant c1 is undefined; "
                "raise epsilon, shrink q, or shorten training"
            ),
        )
    c1 = math.log(1.0 / qs) / cfg.c0
    bound = c1 * cfg.q * cfg.q * cfg.t_max
    if cfg.epsilon < bound:
        return CalibrationResult(
            sigma=sigma,
            c1=c1,
            c2=c2,
            valid=True,
            message=f"valid: epsilon {cfg.epsilon:.6g} < c1*q^2*T = {bound:.6g}",
        )
    return CalibrationResult(
        sigma=sigma,
        c1=c1,
        c2=c2,
        valid=False,
        message=(
            f"epsilon {cfg.epsilon:.6g} >= c1*q^2*T = {bound:.6g}: "
            "outside the regime the noise bound covers"
        ),
    )


@dataclasses.dataclass
class PrivacyReport:
    """What a finished run actually spent and used."""

    epsilon: float
    delta: float
    sigma: float
    steps: int
    q: float
    t_max: int
    c0: float
    c1: float | None
    valid: bool
    message: str

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "PrivacyReport":
        return cls(**obj)


def clip_grads(grads: GradSet, c: float) -> tuple[GradSet, float]:
    """Rescale a grad set to joint norm at most c; returns (clipped, norm)."""
    if c <= 0:
        raise ValueError(f"clip threshold must be positive, got {c}")
    norm = global_norm(grads)
    if math.isfinite(c) and norm > c:
        factor = c / norm
        return {k: v * factor for k, v in grads.items()}, norm
    return {k: v.copy() for k, v in grads.items()}, norm


def clip_schedule(c_initial: float, decay: float, epoch: int, c_min: float) -> float:
    """Exponentially decaying clip threshold, floored at c_min."""
    if epoch < 0:
        raise ValueError(f"epoch must be non-negative, got {epoch}")
    return max(c_min, c_initial * decay**epoch)


def gaussian_noise(shape, std: float, rng: np.random.Generator) -> np.ndarray:
    """N(0, std^2) noise; std = 0 yields exact zeros without consuming rng."""
    if std < 0:
        raise ValueError(f"std must be non-negative, got {std}")
    if std == 0.0:
        return np.zeros(shape)
    return rng.normal(0.0, std, size=shape)


def _sum_clipped(per_node_grads: list[GradSet], c: float) -> GradSet:
    total: GradSet = {}
    for grads in per_node_grads:
        norm = global_norm(grads)
        factor = c / norm if (math.isfinite(c) and norm > c) else 1.0
        for k, v in grads.items():
            contrib = v * factor if factor != 1.0 else v
            if k in total:
                total[k] = total[k] + contrib
            else:
                total[k] = contrib.astype(np.float64, copy=True)
    return total


def average_grads(per_node_grads: list[GradSet], divisor: int) -> GradSet:
    """Plain mean of per-node gradients (the sigma = 0, C = inf case)."""
    if not per_node_grads:
        raise ValueError("no per-node gradients to average")
    total = _sum_clipped(per_node_grads, math.inf)
    return {k: v / float(divisor) for k, v in total.items()}


def dp_gradient(
    per_node_grads: list[GradSet],
    c: float,
    sigma: float,
    divisor: int,
    rng: np.random.Generator | None,
) -> GradSet:
    """Clip per-node contributions, add N(0, sigma^2 c^2 I), average.

    sigma = 0 adds nothing and consumes no randomness, which makes the
    degenerate setting bit-identical to average_grads when c is large
    enough. Noise is drawn per matrix in sorted name order.
    """
    if not per_node_grads:
        raise ValueError("no per-node gradients to privatize")
    if divisor < 1:
        raise ValueError(f"divisor must be at least 1, got {divisor}")
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    if sigma > 0 and not math.isfinite(c):
        raise ValueError("noise with an infinite clip threshold is undefined")
    if sigma > 0 and rng is None:
        raise ValueError("rng required when sigma > 0")
    total = _sum_clipped(per_node_grads, c)
    if sigma > 0.0:
        std = sigma * c
        for k in sorted(total):
            total[k] = total[k] + rng.normal(0.0, std, size=total[k].shape)
    return {k: v / float(divisor) for k, v in total.items()}
