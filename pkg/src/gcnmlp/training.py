"""Cosmean objective, Adam, and the full-batch training loop."""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encoders import Dims, Encoder, backward, forward, init_gcn, init_mlp, init_params
from .errors import ConfigError, DimensionError, NumericalError
from .graph import DatasetBundle, NormalizedAdjacency, normalized_adjacency, row_normalize_features
from .numerics import COS_EPS, row_cosines

log = logging.getLogger(__name__)

VARIANTS = ("gcn-mlp", "gcn-gcn", "mlp-mlp")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    seed: int = 0
    hidden_dim: int = 256
    gcn_layers: int = 2
    mlp_layers: int = 1
    final_activation: bool = False
    normalize_features: bool = True
    variant: str = "gcn-mlp"

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.weight_decay < 0:
            raise ConfigError("weight_decay must be >= 0")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if min(self.hidden_dim, self.gcn_layers, self.mlp_layers) < 1:
            raise ConfigError("hidden_dim, gcn_layers and mlp_layers must be >= 1")


def cosmean_loss(z_s: np.ndarray, z_f: np.ndarray):
    """1 - mean row cosine, with exact gradients for both inputs.

    Rows where either side has norm < 1e-12 count as cosine 0 and get zero
    gradient.
    """
    if z_s.shape != z_f.shape:
        raise DimensionError(f"cosmean_loss: {z_s.shape} vs {z_f.shape}")
    n = z_s.shape[0]
    if n < 1:
        raise DimensionError("cosmean_loss needs at least one row")
    cos, ok = row_cosines(z_s, z_f)
    loss = float(1.0 - cos.mean())
    ok = ok[:, None]
    na = np.where(ok, np.linalg.norm(z_s, axis=1, keepdims=True), 1.0)
    nb = np.where(ok, np.linalg.norm(z_f, axis=1, keepdims=True), 1.0)
    ua, ub = z_s / na, z_f / nb
    c = cos[:, None]
    d_s = np.where(ok, -(ub - c * ua) / (na * n), 0.0)
    d_f = np.where(ok, -(ua - c * ub) / (nb * n), 0.0)
    return loss, d_s, d_f


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params) -> "AdamState":
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState,
              lr: float, weight_decay: float = 0.0):
    """In-place Adam update with bias correction; weight decay is added to the gradient."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise DimensionError("adam_step: parameter/gradient/state count mismatch")
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape or p.shape != m.shape:
            raise DimensionError(f"adam_step: shape {p.shape} vs grad {g.shape}")
        if weight_decay:
            g = g + weight_decay * p
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params, state


@dataclass
class LossTrace:
    losses: list[float] = field(default_factory=list)
    embedding_variance: list[float] = field(default_factory=list)
    epoch_seconds: list[float] = field(default_factory=list)  # wall clock; not serialized

    def __len__(self):
        return len(self.losses)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "loss", "embedding_variance"])
            for i, (l, v) in enumerate(zip(self.losses, self.embedding_variance)):
                w.writerow([i, repr(l), repr(v)])


def embedding_variance(z: np.ndarray) -> float:
    """Mean per-dimension variance of L2-normalized rows; near 0 signals collapse."""
    nrm = np.linalg.norm(z, axis=1, keepdims=True)
    u = z / np.where(nrm < COS_EPS, 1.0, nrm)
    return float(u.var(axis=0).mean())


def prepare_features(dataset: DatasetBundle, config: TrainConfig) -> np.ndarray:
    return row_normalize_features(dataset.features) if config.normalize_features else dataset.features


def init_views(config: TrainConfig, in_dim: int) -> tuple[Encoder, Encoder]:
    dims = Dims(in_dim, config.hidden_dim, config.gcn_layers, config.mlp_layers)
    if config.variant == "gcn-mlp":
        return init_params(config.seed, dims, config.final_activation)
    rng = np.random.default_rng(config.seed)
    if config.variant == "gcn-gcn":
        return init_gcn(rng, dims, config.final_activation), init_gcn(rng, dims, config.final_activation)
    return init_mlp(rng, dims), init_mlp(rng, dims)


def embed(views, adj: NormalizedAdjacency, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward both views. The first output is the structural view for gcn-mlp."""
    return forward(views[0], adj, x)[0], forward(views[1], adj, x)[0]


def train(dataset: DatasetBundle, config: TrainConfig, adj: NormalizedAdjacency | None = None,
          trace_path=None):
    """Full-batch contrastive training of two views.

    Returns ``(view_a, view_b, trace)``; for the default gcn-mlp variant these
    are ``(GcnParams, MlpParams, LossTrace)``. Raises NumericalError if the
    loss or any parameter becomes non-finite.
    """
    x = prepare_features(dataset, config)
    if adj is None:
        adj = normalized_adjacency(dataset.graph, with_self_loops=True)
    views = init_views(config, x.shape[1])
    tensors = [*views[0].tensors(), *views[1].tensors()]
    state = AdamState.zeros_like(tensors)
    trace = LossTrace()
    for epoch in range(config.epochs):
        tic = time.perf_counter()
        za, ca = forward(views[0], adj, x)
        zb, cb = forward(views[1], adj, x)
        loss, da, db = cosmean_loss(za, zb)
        if not np.isfinite(loss) or not (np.all(np.isfinite(za)) and np.all(np.isfinite(zb))):
            raise NumericalError(f"non-finite loss/embedding at epoch {epoch} (seed {config.seed})")
        trace.losses.append(loss)
        trace.embedding_variance.append(0.5 * (embedding_variance(za) + embedding_variance(zb)))
        grads = [*backward(ca, adj, da), *backward(cb, adj, db)]
        adam_step(tensors, grads, state, config.learning_rate, config.weight_decay)
        views[0].version += 1
        views[1].version += 1
        if not all(np.all(np.isfinite(t)) for t in tensors):
            raise NumericalError(f"non-finite parameters after epoch {epoch} (seed {config.seed})")
        trace.epoch_seconds.append(time.perf_counter() - tic)
    log.debug("seed %d: loss %.4f -> %.4f", config.seed, trace.losses[0], trace.losses[-1])
    if trace_path is not None:
        trace.write_csv(Path(trace_path))
    return views[0], views[1], trace


